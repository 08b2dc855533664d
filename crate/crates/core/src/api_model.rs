//! Static metadata about the crypto APIs that mutants touch.
//!
//! Everything the engine needs to emit *compilable* snippets — imports,
//! checked exceptions to catch, abstract methods to stub, legal placement
//! kinds — comes from this model as data. Nothing is discovered at runtime
//! via the target platform; the model is authored JSON, validated on load,
//! with a vetted copy embedded in the crate.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{ApiKind, MisuseCase, Registry};

const BUNDLED_MODEL: &str = include_str!("../data/api_model.json");

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

/// Snippet form a piece of glue supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlueForm {
    /// Statement sequence placed inside a method-like body.
    Statement,
    /// Member declarations placed inside a class body.
    Declaration,
}

impl fmt::Display for GlueForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GlueForm::Statement => "statement",
            GlueForm::Declaration => "declaration",
        })
    }
}

/// Parse-tree position categories a snippet may be seeded into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementKind {
    MainEntry,
    MethodBodyStart,
    StatementInConditional,
    SimilarUsageSite,
    ClassBody,
    AnonymousInnerBody,
}

impl PlacementKind {
    pub const ALL: [PlacementKind; 6] = [
        PlacementKind::MainEntry,
        PlacementKind::MethodBodyStart,
        PlacementKind::StatementInConditional,
        PlacementKind::SimilarUsageSite,
        PlacementKind::ClassBody,
        PlacementKind::AnonymousInnerBody,
    ];

    /// Statement-form positions (insertion into a `{ ... }` block body).
    pub fn is_statement_position(self) -> bool {
        !matches!(
            self,
            PlacementKind::ClassBody | PlacementKind::AnonymousInnerBody
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlacementKind::MainEntry => "main-entry",
            PlacementKind::MethodBodyStart => "method-body-start",
            PlacementKind::StatementInConditional => "statement-in-conditional",
            PlacementKind::SimilarUsageSite => "similar-usage-site",
            PlacementKind::ClassBody => "class-body",
            PlacementKind::AnonymousInnerBody => "anonymous-inner-body",
        }
    }
}

impl fmt::Display for PlacementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeForm {
    Interface,
    AbstractClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactoryInvocation {
    /// `Type.method(args)`
    StaticMethod,
    /// `new Type(args)`
    Constructor,
}

/// Factory entry point of a restrictive API.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorySpec {
    /// Method name, or the type's simple name for constructors.
    pub name: String,
    pub invocation: FactoryInvocation,
    pub parameter_count: usize,
    /// Index of the parameter carrying the (string-derived) identity value.
    pub string_parameter_index: usize,
    /// Call applied to the string expression before passing it, e.g.
    /// `getBytes()` when the parameter is a byte array.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub string_adapter: Option<String>,
    /// Literal argument texts for the remaining parameters, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_arguments: Vec<String>,
    /// Checked exceptions thrown by the factory, in declaration order.
    pub checked_exceptions: Vec<String>,
}

/// One formal parameter with its three naming profiles.
///
/// Published misuse exemplars disagree on stub parameter names (generated
/// positional names in some, semantic names in others), so the model pins a
/// canonical profile for plain stubs plus the generic/context profiles used
/// when an unreachable/always-true condition references the parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodParam {
    /// Source-level type, fully qualified where applicable. `[]` suffix ok.
    #[serde(rename = "type")]
    pub type_name: String,
    pub canonical: String,
    pub generic: String,
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractMethod {
    pub name: String,
    pub params: Vec<MethodParam>,
    pub return_type: String,
    #[serde(default)]
    pub throws: Vec<String>,
    /// Parameter names (generic profile) that a generic-mode condition
    /// null-checks. Empty for methods that never carry conditions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generic_condition_params: Vec<String>,
    /// Attribute-referencing expression (context profile names) for
    /// context-specific conditions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_condition_expr: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiSpec {
    pub qualified_name: String,
    pub kind: ApiKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_form: Option<TypeForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factory: Option<FactorySpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub abstract_methods: Vec<AbstractMethod>,
    pub required_imports: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known_subtypes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiModel {
    pub version: u32,
    /// Variable name bound in generated catch clauses.
    pub catch_var: String,
    /// Catch-clause body, recorded as plain text lines.
    pub catch_body: Vec<String>,
    pub apis: Vec<ApiSpec>,
}

/// Everything the seeder wraps around a snippet to keep it compilable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntacticGlue {
    /// Fully qualified imports the snippet needs.
    pub imports: Vec<String>,
    /// Checked exceptions to catch around statement-form snippets, in order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub try_catch: Option<Vec<String>>,
    /// Rendered benign stubs for every abstract method (flexible APIs).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stub_methods: Vec<String>,
    /// Positions this glue's snippet may legally occupy.
    pub placement_kinds: Vec<PlacementKind>,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Last dotted segment of a (possibly array-suffixed) qualified name.
pub fn simple_name(qualified: &str) -> &str {
    let base = qualified.strip_suffix("[]").unwrap_or(qualified);
    match base.rfind('.') {
        Some(dot) => &qualified[dot + 1..],
        None => qualified,
    }
}

impl ApiModel {
    pub fn bundled() -> &'static ApiModel {
        static MODEL: OnceLock<ApiModel> = OnceLock::new();
        MODEL.get_or_init(|| {
            let model: ApiModel =
                serde_json::from_str(BUNDLED_MODEL).expect("bundled api model must parse");
            model.validate().expect("bundled api model must validate");
            model
        })
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<ApiModel> {
        let model: ApiModel =
            serde_json::from_str(text).map_err(|e| Error::json(origin.to_path_buf(), e))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<ApiModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        ApiModel::from_json(&text, path)
    }

    pub fn lookup(&self, qualified_name: &str) -> Option<&ApiSpec> {
        self.apis.iter().find(|a| a.qualified_name == qualified_name)
    }

    /// Like [`lookup`](Self::lookup) but failing with [`Error::ApiNotFound`].
    pub fn require(&self, qualified_name: &str) -> Result<&ApiSpec> {
        self.lookup(qualified_name)
            .ok_or_else(|| Error::ApiNotFound(qualified_name.to_string()))
    }

    /// Resolve the spec a case targets, mapping absence to
    /// [`Error::MissingSpec`] so the offending case is named.
    pub fn spec_for_case<'a>(&'a self, case: &MisuseCase) -> Result<&'a ApiSpec> {
        self.lookup(&case.target_api.type_name)
            .ok_or_else(|| Error::MissingSpec {
                case_id: case.id.clone(),
                api: case.target_api.type_name.clone(),
            })
    }

    /// Check that every selected case in `registry` resolves against this
    /// model and that declared behaviors name real abstract methods.
    pub fn validate_against(&self, registry: &Registry) -> Result<()> {
        for case in registry.selected_cases() {
            let spec = self.spec_for_case(case)?;
            if spec.kind != case.api_kind {
                return Err(Error::InvalidModel(format!(
                    "case `{}` is {:?} but spec `{}` is {:?}",
                    case.id, case.api_kind, spec.qualified_name, spec.kind
                )));
            }
            if let Some(behavior) = &case.behavior {
                if spec.find_method(&behavior.method).is_none() {
                    return Err(Error::InvalidModel(format!(
                        "case `{}` subverts `{}`, which `{}` does not declare",
                        case.id, behavior.method, spec.qualified_name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Build the glue for a spec in the requested form.
    ///
    /// Statement form exists only for restrictive specs (the try/catch wrap
    /// around a factory call); declaration form only for flexible specs
    /// (benign stubs for every abstract method). Restrictive glue excludes
    /// class-body positions — a checked-exception-throwing call cannot sit in
    /// a field initializer — while flexible snippets are placeable anywhere.
    pub fn glue_for(&self, spec: &ApiSpec, form: GlueForm) -> Result<SyntacticGlue> {
        match (spec.kind, form) {
            (ApiKind::Restrictive, GlueForm::Statement) => {
                let factory = spec.factory.as_ref().ok_or_else(|| Error::InvalidModel(
                    format!("restrictive spec `{}` has no factory", spec.qualified_name),
                ))?;
                let mut imports = spec.required_imports.clone();
                for exc in &factory.checked_exceptions {
                    if !imports.contains(exc) {
                        imports.push(exc.clone());
                    }
                }
                let try_catch = if factory.checked_exceptions.is_empty() {
                    None
                } else {
                    Some(factory.checked_exceptions.clone())
                };
                Ok(SyntacticGlue {
                    imports,
                    try_catch,
                    stub_methods: Vec::new(),
                    placement_kinds: PlacementKind::ALL
                        .into_iter()
                        .filter(|k| k.is_statement_position())
                        .collect(),
                })
            }
            (ApiKind::Flexible, GlueForm::Declaration) => Ok(SyntacticGlue {
                imports: spec.required_imports.clone(),
                try_catch: None,
                stub_methods: spec
                    .abstract_methods
                    .iter()
                    .map(|m| render_stub(m, NamingProfile::Canonical))
                    .collect(),
                placement_kinds: PlacementKind::ALL.to_vec(),
            }),
            (kind, form) => Err(Error::IncompatibleForm {
                api: spec.qualified_name.clone(),
                form: form.to_string(),
                detail: format!("{kind:?} APIs do not provide {form} glue"),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::InvalidModel(format!(
                "unsupported api model version {} (expected 1)",
                self.version
            )));
        }
        if self.catch_var.is_empty() || self.catch_body.is_empty() {
            return Err(Error::InvalidModel(
                "catch_var and catch_body must be populated".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for spec in &self.apis {
            if !seen.insert(spec.qualified_name.as_str()) {
                return Err(Error::InvalidModel(format!(
                    "duplicate spec `{}`",
                    spec.qualified_name
                )));
            }
            spec.validate()?;
        }
        Ok(())
    }
}

impl ApiSpec {
    pub fn simple_name(&self) -> &str {
        simple_name(&self.qualified_name)
    }

    /// First declared abstract method with the given name (overload groups
    /// are ordered so the primary overload comes first).
    pub fn find_method(&self, name: &str) -> Option<&AbstractMethod> {
        self.abstract_methods.iter().find(|m| m.name == name)
    }

    fn validate(&self) -> Result<()> {
        let fail = |detail: String| {
            Err(Error::InvalidModel(format!(
                "`{}`: {detail}",
                self.qualified_name
            )))
        };
        if self.required_imports.is_empty() {
            return fail("required_imports must not be empty".into());
        }
        match self.kind {
            ApiKind::Restrictive => {
                let Some(factory) = &self.factory else {
                    return fail("restrictive spec needs a factory".into());
                };
                if factory.string_parameter_index >= factory.parameter_count {
                    return fail(format!(
                        "string_parameter_index {} out of range for {} parameters",
                        factory.string_parameter_index, factory.parameter_count
                    ));
                }
                if factory.extra_arguments.len() != factory.parameter_count - 1 {
                    return fail(format!(
                        "expected {} extra_arguments, found {}",
                        factory.parameter_count - 1,
                        factory.extra_arguments.len()
                    ));
                }
            }
            ApiKind::Flexible => {
                if self.type_form.is_none() {
                    return fail("flexible spec needs a type_form".into());
                }
                if self.abstract_methods.is_empty() {
                    return fail("flexible spec needs abstract_methods".into());
                }
                if self.factory.is_some() {
                    return fail("flexible spec must not declare a factory".into());
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Stub rendering
// ---------------------------------------------------------------------------

/// Which per-parameter naming profile to render signatures with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamingProfile {
    Canonical,
    Generic,
    Context,
}

impl MethodParam {
    pub fn name(&self, profile: NamingProfile) -> &str {
        match profile {
            NamingProfile::Canonical => &self.canonical,
            NamingProfile::Generic => &self.generic,
            NamingProfile::Context => &self.context,
        }
    }
}

impl AbstractMethod {
    /// `public RET name(T a, U b) throws E1, E2` — no body.
    pub fn signature(&self, profile: NamingProfile) -> String {
        let params = self
            .params
            .iter()
            .map(|p| format!("{} {}", simple_name(&p.type_name), p.name(profile)))
            .collect::<Vec<_>>()
            .join(", ");
        let throws = if self.throws.is_empty() {
            String::new()
        } else {
            let list = self
                .throws
                .iter()
                .map(|t| simple_name(t))
                .collect::<Vec<_>>()
                .join(", ");
            format!(" throws {list}")
        };
        format!(
            "public {} {}({params}){throws}",
            simple_name(&self.return_type),
            self.name
        )
    }

    /// Benign default body: nothing for `void`, `return null;` for reference
    /// returns, `return true;` for booleans.
    pub fn neutral_body(&self) -> Vec<String> {
        match self.return_type.as_str() {
            "void" => Vec::new(),
            "boolean" => vec!["return true;".into()],
            _ => vec!["return null;".into()],
        }
    }
}

/// Render one complete stub method with its neutral body.
pub fn render_stub(method: &AbstractMethod, profile: NamingProfile) -> String {
    render_method(method, profile, &method.neutral_body())
}

/// Render a method with the given body lines, indented one level.
pub fn render_method(method: &AbstractMethod, profile: NamingProfile, body: &[String]) -> String {
    let mut text = format!("{} {{\n", method.signature(profile));
    for line in body {
        if line.is_empty() {
            text.push('\n');
        } else {
            text.push_str("    ");
            text.push_str(line);
            text.push('\n');
        }
    }
    text.push('}');
    text
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
