//! The mutation engine: instantiates misuse cases as compilable source-level
//! mutants via twelve operators.
//!
//! OP1–OP6 transform the *argument* of a restrictive factory call while
//! preserving its effective value; OP7–OP9 produce incorrect method *bodies*
//! for flexible (override-style) APIs; OP10–OP12 produce the class
//! *structures* housing those bodies. Generation is fully deterministic:
//! identical `(case, operator, config)` inputs yield byte-identical mutants.

mod eval;
mod flexible;
mod restrictive;

pub use eval::effective_value_oracle;
pub use flexible::{condition_text, ConditionPolarity};

use serde::{Deserialize, Serialize};

use crate::api_model::{ApiModel, ApiSpec, GlueForm, SyntacticGlue};
use crate::error::{Error, Result};
use crate::taxonomy::{ApiKind, MisuseCase, OperatorId, Registry, ThreatTag};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Which flavor of unreachable/always-true condition OP7(b)/OP8(b) emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionMode {
    /// Literals and null-checks only (`true || arg0 == null`).
    Generic,
    /// References attributes of actual parameters
    /// (`session.getCipherSuite().length()>=0`).
    ContextSpecific,
}

/// The source payload of a mutant, kept separate from its glue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    /// Complete helper type declarations, emitted before the statements
    /// (as local classes) or alongside them (as nested types).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub helper_declarations: Vec<String>,
    /// Statement texts, in order. Restrictive snippets end with the factory
    /// call; flexible snippets end with the binding of the misuse object.
    pub statements: Vec<String>,
    /// Class-body member form, when the snippet supports one (flexible
    /// mutants: the binding as a field declaration).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declaration: Option<String>,
}

impl Snippet {
    /// Readable concatenation used for snippet files and debugging.
    pub fn display_text(&self) -> String {
        let mut out = String::new();
        for helper in &self.helper_declarations {
            out.push_str(helper);
            out.push('\n');
        }
        for stmt in &self.statements {
            out.push_str(stmt);
            out.push('\n');
        }
        out
    }
}

/// A single generated misuse instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mutant {
    /// `<case>__<operator>__<variant>`, unique within one generation run.
    pub id: String,
    pub case_id: String,
    pub operator_id: OperatorId,
    /// Body operator for housing mutants (OP10–OP12 only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_operator_id: Option<OperatorId>,
    /// 1-based variant ordinal under the generating config.
    pub variant: u32,
    /// Human label for the variant ("all-lower", "noise-replace", ...).
    pub variant_label: String,
    pub threat_tags: Vec<ThreatTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_mode: Option<ConditionMode>,
    pub snippet: Snippet,
    pub glue: SyntacticGlue,
    /// For restrictive mutants: the value the transformed argument
    /// evaluates to (a registered insecure argument, case-insensitively).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_value: Option<String>,
    /// For restrictive mutants whose argument is one self-contained
    /// expression: that expression's text (drives `--in-place` seeding).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argument_expr: Option<String>,
    /// Identifiers the snippet declares at statement/member level; the
    /// seeder renames them per record to keep bulk seeding collision-free.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fresh_names: Vec<String>,
    /// False for variants that parse but reference identifiers absent from
    /// the standard library (kept verbatim to match published exemplars).
    pub compile_safe: bool,
}

impl Mutant {
    pub fn is_restrictive(&self) -> bool {
        self.operator_id.is_restrictive() || self.effective_value.is_some()
    }
}

/// Knobs for [`apply_operator`]. `Default` gives the documented defaults;
/// [`OperatorConfig::for_registry`] additionally fills the OP4 donor pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorConfig {
    /// Upper bound on variants emitted per (case, operator) pair.
    pub variant_cap: usize,
    pub condition_mode: ConditionMode,
    /// Body operator for OP10–OP12; defaults to the case's first applicable
    /// OP7–OP9 operator.
    pub body_operator: Option<OperatorId>,
    /// Which of the case's insecure arguments OP1–OP5 transform.
    pub argument_index: usize,
    /// Donor values for OP4's insecure-to-insecure replacement.
    pub donor_arguments: Vec<String>,
}

pub const DEFAULT_VARIANT_CAP: usize = 3;

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            variant_cap: DEFAULT_VARIANT_CAP,
            condition_mode: ConditionMode::Generic,
            body_operator: None,
            argument_index: 0,
            donor_arguments: Vec::new(),
        }
    }
}

impl OperatorConfig {
    pub fn for_registry(registry: &Registry) -> Self {
        OperatorConfig {
            donor_arguments: registry.donor_pool(),
            ..Default::default()
        }
    }
}

/// Intermediate variant produced by the per-operator emitters.
#[derive(Debug, Clone, Default)]
pub(crate) struct VariantDraft {
    pub label: String,
    pub helpers: Vec<String>,
    pub statements: Vec<String>,
    pub declaration: Option<String>,
    pub effective_value: Option<String>,
    pub argument_expr: Option<String>,
    pub extra_imports: Vec<String>,
    pub fresh_names: Vec<String>,
    pub threat_tags: Vec<ThreatTag>,
    pub condition_mode: Option<ConditionMode>,
    pub body_operator: Option<OperatorId>,
    pub compile_unsafe: bool,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Instantiate `case` through `operator`, yielding at most
/// `config.variant_cap` mutants.
pub fn apply_operator(
    case: &MisuseCase,
    operator: OperatorId,
    model: &ApiModel,
    config: &OperatorConfig,
) -> Result<Vec<Mutant>> {
    if !case.applicable_operators.contains(&operator) {
        return Err(Error::InapplicableOperator {
            case_id: case.id.clone(),
            operator: operator.to_string(),
        });
    }
    let spec = model.spec_for_case(case)?;
    let drafts = if operator.is_restrictive() {
        restrictive::emit(case, spec, operator, config)?
    } else {
        flexible::emit(case, spec, model, operator, config)?
    };
    let mut drafts = drafts;
    drafts.truncate(config.variant_cap.max(1));
    drafts
        .into_iter()
        .enumerate()
        .map(|(i, draft)| finalize(case, spec, model, operator, i as u32 + 1, draft))
        .collect()
}

/// Generate every mutant for a set of cases under one config: all applicable
/// operators plus the base instantiation per case. Deterministic order:
/// registry order, then BASE, then OP1..OP12, then variant.
pub fn generate_all(
    cases: &[&MisuseCase],
    model: &ApiModel,
    config: &OperatorConfig,
) -> Result<Vec<Mutant>> {
    let mut out = Vec::new();
    for case in cases {
        out.push(base_instantiation(case, model)?);
        for op in OperatorId::ALL {
            if case.applicable_operators.contains(&op) {
                out.extend(apply_operator(case, op, model, config)?);
            }
        }
    }
    Ok(out)
}

/// The most literal instantiation of a case: the insecure value passed
/// verbatim (restrictive), or the neutral-behavior object (flexible).
pub fn base_instantiation(case: &MisuseCase, model: &ApiModel) -> Result<Mutant> {
    let spec = model.spec_for_case(case)?;
    let draft = match case.api_kind {
        ApiKind::Restrictive => {
            let arg = case.insecure_arguments.first().ok_or_else(|| {
                Error::InvalidCase {
                    case_id: case.id.clone(),
                    detail: "restrictive case has no insecure_arguments".into(),
                }
            })?;
            let expr = java_string_literal(arg);
            VariantDraft {
                label: "base".into(),
                statements: vec![restrictive::factory_statement(spec, &expr)?],
                effective_value: Some(arg.clone()),
                argument_expr: Some(expr),
                threat_tags: case.threat_tags.clone(),
                ..Default::default()
            }
        }
        ApiKind::Flexible => flexible::base_draft(case, spec)?,
    };
    finalize(case, spec, model, OperatorId::Base, 1, draft)
}

fn finalize(
    case: &MisuseCase,
    spec: &ApiSpec,
    model: &ApiModel,
    operator: OperatorId,
    variant: u32,
    draft: VariantDraft,
) -> Result<Mutant> {
    let form = match case.api_kind {
        ApiKind::Restrictive => GlueForm::Statement,
        ApiKind::Flexible => GlueForm::Declaration,
    };
    let mut glue = model.glue_for(spec, form)?;
    for import in &draft.extra_imports {
        if !glue.imports.contains(import) {
            glue.imports.push(import.clone());
        }
    }
    let mutant = Mutant {
        id: format!("{}__{}__{}", case.id, operator, variant),
        case_id: case.id.clone(),
        operator_id: operator,
        body_operator_id: draft.body_operator,
        variant,
        variant_label: draft.label,
        threat_tags: draft.threat_tags,
        condition_mode: draft.condition_mode,
        snippet: Snippet {
            helper_declarations: draft.helpers,
            statements: draft.statements,
            declaration: draft.declaration,
        },
        glue,
        effective_value: draft.effective_value,
        argument_expr: draft.argument_expr,
        fresh_names: draft.fresh_names,
        compile_safe: !draft.compile_unsafe,
    };
    debug_assert!(
        !mutant.operator_id.is_restrictive() || mutant.effective_value.is_some(),
        "restrictive mutant without effective value: {}",
        mutant.id
    );
    Ok(mutant)
}

/// Quote a Rust string as a Java string literal.
pub fn java_string_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for ch in value.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

/// Case-insensitive membership test used for effective-value invariants:
/// the platform's provider lookup treats algorithm names case-insensitively,
/// which is exactly why case-transforming operators still hit the misuse.
pub fn is_registered_insecure(case: &MisuseCase, value: &str) -> bool {
    case.insecure_arguments
        .iter()
        .any(|arg| arg.eq_ignore_ascii_case(value))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::api_model::ApiModel;
    use crate::taxonomy::Registry;

    fn setup() -> (&'static Registry, &'static ApiModel, OperatorConfig) {
        let registry = Registry::bundled();
        (registry, ApiModel::bundled(), OperatorConfig::for_registry(registry))
    }

    #[test]
    fn inapplicable_operator_is_rejected() {
        let (registry, model, config) = setup();
        let case = registry.case("des-cipher").unwrap();
        let err = apply_operator(case, OperatorId::Op12, model, &config).unwrap_err();
        assert!(matches!(err, Error::InapplicableOperator { .. }), "got {err:?}");
    }

    #[test]
    fn base_instantiation_of_des_is_the_literal_call() {
        let (registry, model, _) = setup();
        let case = registry.case("des-cipher").unwrap();
        let base = base_instantiation(case, model).unwrap();
        assert_eq!(base.snippet.statements, ["Cipher.getInstance(\"DES\");"]);
        assert_eq!(base.effective_value.as_deref(), Some("DES"));
        assert_eq!(base.id, "des-cipher__BASE__1");
        assert!(base.glue.try_catch.is_some());
    }

    #[test]
    fn base_instantiation_succeeds_for_every_selected_case() {
        let (registry, model, _) = setup();
        for case in registry.selected_cases() {
            let base = base_instantiation(case, model)
                .unwrap_or_else(|e| panic!("base of `{}` failed: {e}", case.id));
            assert!(!base.snippet.statements.is_empty(), "{}", case.id);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let (registry, model, config) = setup();
        let cases: Vec<_> = registry.selected_cases().collect();
        let a = generate_all(&cases, model, &config).unwrap();
        let b = generate_all(&cases, model, &config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let mut ids: Vec<&str> = a.iter().map(|m| m.id.as_str()).collect();
        let total = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), total, "mutant ids must be unique per run");
    }

    #[test]
    fn variant_cap_bounds_fanout() {
        let (registry, model, mut config) = setup();
        config.variant_cap = 1;
        let case = registry.case("des-cipher").unwrap();
        for op in [OperatorId::Op1, OperatorId::Op4] {
            let mutants = apply_operator(case, op, model, &config).unwrap();
            assert_eq!(mutants.len(), 1, "{op}");
        }
    }

    #[test]
    fn java_string_literal_escapes() {
        assert_eq!(java_string_literal("DES"), "\"DES\"");
        assert_eq!(java_string_literal("a\"b\\c"), "\"a\\\"b\\\\c\"");
    }
}
