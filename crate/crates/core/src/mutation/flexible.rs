//! Flexible operators OP7–OP12: neutralized method bodies for
//! override-style APIs (OP7–OP9) and the class structures housing those
//! bodies (OP10–OP12).

use crate::api_model::{
    render_method, render_stub, simple_name, AbstractMethod, ApiModel, ApiSpec, NamingProfile,
    TypeForm,
};
use crate::error::{Error, Result};
use crate::mutation::{ConditionMode, OperatorConfig, VariantDraft};
use crate::taxonomy::{Behavior, MisuseCase, NeutralOutcome, OperatorId, ThreatTag};

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionPolarity {
    /// Guard that always holds (`true || ...`) — forces a premature outcome.
    AlwaysTrue,
    /// Guard that can never hold (`!(true || ...)`) — makes real handling
    /// unreachable.
    NeverTrue,
}

/// Render a vacuous guard over `method`'s parameters.
///
/// Generic mode sticks to null-checks of the (generic-profile) parameters;
/// context-specific mode embeds the model's attribute-referencing
/// expression. Both are short-circuited by a leading `true`, so the
/// parameter clauses never evaluate.
pub fn condition_text(
    mode: ConditionMode,
    method: &AbstractMethod,
    polarity: ConditionPolarity,
) -> Result<String> {
    match mode {
        ConditionMode::Generic => {
            let names: Vec<&str> = if method.generic_condition_params.is_empty() {
                method.params.iter().map(|p| p.generic.as_str()).collect()
            } else {
                method
                    .generic_condition_params
                    .iter()
                    .map(String::as_str)
                    .collect()
            };
            if names.is_empty() {
                return Err(Error::ConditionUnavailable {
                    method: method.name.clone(),
                    detail: "method has no parameters to reference".into(),
                });
            }
            Ok(match polarity {
                ConditionPolarity::AlwaysTrue => {
                    let checks = names
                        .iter()
                        .map(|n| format!("{n} == null"))
                        .collect::<Vec<_>>()
                        .join(" || ");
                    format!("true || {checks}")
                }
                ConditionPolarity::NeverTrue => {
                    let checks = names
                        .iter()
                        .map(|n| format!("{n} == null"))
                        .collect::<Vec<_>>()
                        .join("||");
                    format!("!(true||{checks})")
                }
            })
        }
        ConditionMode::ContextSpecific => {
            let expr = method.context_condition_expr.as_deref().ok_or_else(|| {
                Error::ConditionUnavailable {
                    method: method.name.clone(),
                    detail: "no context-specific condition expression in the API model".into(),
                }
            })?;
            Ok(match polarity {
                ConditionPolarity::AlwaysTrue => format!("true || {expr}"),
                ConditionPolarity::NeverTrue => format!("!(true || {expr})"),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Method bodies (OP7–OP9)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BodyVariant {
    /// OP7(a): exception handling silently removed.
    Silent,
    /// OP7(b): the throw survives behind a never-true guard.
    UnreachableThrow,
    /// OP8(a): verdict replaced by a constant.
    ConstantReturn,
    /// OP8(b): constant verdict behind an always-true guard.
    PrematureReturn,
    /// OP9: busywork loop, then the neutral outcome.
    IrrelevantLoop,
}

impl BodyVariant {
    fn label(self) -> &'static str {
        match self {
            BodyVariant::Silent => "silent-handler",
            BodyVariant::UnreachableThrow => "unreachable-throw",
            BodyVariant::ConstantReturn => "constant-return",
            BodyVariant::PrematureReturn => "premature-return",
            BodyVariant::IrrelevantLoop => "irrelevant-loop",
        }
    }

    fn tags(self) -> Vec<ThreatTag> {
        match self {
            BodyVariant::Silent | BodyVariant::ConstantReturn => vec![ThreatTag::T1],
            _ => vec![ThreatTag::T3],
        }
    }

    fn uses_condition(self) -> bool {
        matches!(self, BodyVariant::UnreachableThrow | BodyVariant::PrematureReturn)
    }
}

fn body_variants_for(
    case: &MisuseCase,
    op: OperatorId,
    outcome: &NeutralOutcome,
) -> Result<Vec<BodyVariant>> {
    let inapplicable = || Error::InapplicableOperator {
        case_id: case.id.clone(),
        operator: format!("{op} (behavior outcome does not fit)"),
    };
    match op {
        OperatorId::Op7 => match outcome {
            NeutralOutcome::SuppressException { .. } => {
                Ok(vec![BodyVariant::Silent, BodyVariant::UnreachableThrow])
            }
            NeutralOutcome::ConstantReturn { .. } => Err(inapplicable()),
        },
        OperatorId::Op8 => match outcome {
            NeutralOutcome::ConstantReturn { .. } => {
                Ok(vec![BodyVariant::ConstantReturn, BodyVariant::PrematureReturn])
            }
            NeutralOutcome::SuppressException { .. } => Err(inapplicable()),
        },
        OperatorId::Op9 => Ok(vec![BodyVariant::IrrelevantLoop]),
        _ => Err(inapplicable()),
    }
}

/// Allocator for the snippet-level `mascVar<N>` names. The binding variable
/// is always allocated first, so it is `mascVar1` in every mutant.
struct NameAlloc {
    next: u32,
}

impl NameAlloc {
    fn new() -> Self {
        NameAlloc { next: 1 }
    }

    fn fresh(&mut self) -> String {
        let name = format!("mascVar{}", self.next);
        self.next += 1;
        name
    }
}

fn opposite_verdict(value: &str) -> &'static str {
    match value {
        "true" => "false",
        "false" => "true",
        _ => "null",
    }
}

fn render_body(
    variant: BodyVariant,
    method: &AbstractMethod,
    outcome: &NeutralOutcome,
    mode: ConditionMode,
    profile: NamingProfile,
    alloc: &mut NameAlloc,
) -> Result<Vec<String>> {
    Ok(match variant {
        BodyVariant::Silent => Vec::new(),
        BodyVariant::UnreachableThrow => {
            let NeutralOutcome::SuppressException { exception } = outcome else {
                unreachable!("guarded by body_variants_for");
            };
            let cond = condition_text(mode, method, ConditionPolarity::NeverTrue)?;
            let exc = simple_name(exception);
            // The context-specific flavor also decorates the throw with an
            // argument-derived message, mirroring published exemplars.
            let throw_expr = match mode {
                ConditionMode::Generic => format!("new {exc}()"),
                ConditionMode::ContextSpecific => format!("new {exc}(\"RSA\")"),
            };
            vec![
                format!("if ({cond}) {{"),
                format!("    throw {throw_expr};"),
                "}".into(),
            ]
        }
        BodyVariant::ConstantReturn => {
            let NeutralOutcome::ConstantReturn { value } = outcome else {
                unreachable!("guarded by body_variants_for");
            };
            vec![format!("return {value};")]
        }
        BodyVariant::PrematureReturn => {
            let NeutralOutcome::ConstantReturn { value } = outcome else {
                unreachable!("guarded by body_variants_for");
            };
            let cond = condition_text(mode, method, ConditionPolarity::AlwaysTrue)?;
            vec![
                format!("if ({cond}) {{"),
                format!("    return {value};"),
                "}".into(),
                format!("return {};", opposite_verdict(value)),
            ]
        }
        BodyVariant::IrrelevantLoop => {
            let counter = alloc.fresh();
            let iter = alloc.fresh();
            let mut lines = vec![format!("int {counter} = 0;")];
            match method.params.iter().find(|p| p.type_name.ends_with("[]")) {
                Some(array_param) => {
                    let elem = simple_name(array_param.type_name.strip_suffix("[]").unwrap());
                    lines.push(format!(
                        "for ({elem} {iter} : {}) {{",
                        array_param.name(profile)
                    ));
                }
                None => {
                    lines.push(format!("for (int {iter} = 0; {iter} < 10; {iter}++) {{"));
                }
            }
            lines.push(format!("    {counter}++;"));
            lines.push("}".into());
            match outcome {
                NeutralOutcome::ConstantReturn { value } => lines.push(format!("return {value};")),
                NeutralOutcome::SuppressException { .. } => {}
            }
            lines
        }
    })
}

// ---------------------------------------------------------------------------
// Housings (OP10–OP12 + the implicit housing of standalone OP7–OP9)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Housing {
    /// Named class implementing/extending the API directly.
    DirectNamed,
    /// Empty abstract supertype, concrete subclass carries the bodies.
    AbstractPair,
    /// Anonymous class on the API itself.
    AnonymousDirect,
    /// Anonymous class on an empty interface extending the API.
    AnonymousViaInterface,
    /// Anonymous class on an empty abstract class implementing the API.
    AnonymousViaAbstract,
}

impl Housing {
    fn label(self) -> &'static str {
        match self {
            Housing::DirectNamed => "named-class",
            Housing::AbstractPair => "abstract-supertype",
            Housing::AnonymousDirect => "anonymous-direct",
            Housing::AnonymousViaInterface => "anonymous-via-interface",
            Housing::AnonymousViaAbstract => "anonymous-via-abstract",
        }
    }

    /// Direct anonymous instantiation adds no structural obfuscation; every
    /// other housing is itself an evasion layer (T3).
    fn adds_t3(self) -> bool {
        !matches!(self, Housing::AnonymousDirect)
    }
}

/// `implements` for interfaces, `extends` for abstract classes.
fn direct_link(spec: &ApiSpec) -> &'static str {
    match spec.type_form {
        Some(TypeForm::AbstractClass) => "extends",
        _ => "implements",
    }
}

fn indent_into(out: &mut String, text: &str) {
    for line in text.lines() {
        if line.is_empty() {
            out.push('\n');
        } else {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
    }
}

/// Render `intro { methods... }` as a type declaration.
fn render_class(intro: &str, methods: &[String]) -> String {
    let mut out = format!("{intro} {{\n");
    for (i, method) in methods.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        indent_into(&mut out, method);
    }
    out.push('}');
    out
}

fn anonymous_binding(api: &str, instantiated: &str, methods: &[String], var: &str) -> String {
    let mut out = format!("{api} {var} = new {instantiated}() {{\n");
    for (i, method) in methods.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        indent_into(&mut out, method);
    }
    out.push_str("};");
    out
}

fn named_binding(api: &str, helper: &str, var: &str) -> String {
    format!("{api} {var} = new {helper}();")
}

/// All abstract methods in model order; the first overload of the behavior
/// method gets `body`, everything else its neutral stub.
fn render_methods(
    spec: &ApiSpec,
    behavior_method: &str,
    body: &[String],
    profile: NamingProfile,
) -> Vec<String> {
    let mut target_done = false;
    spec.abstract_methods
        .iter()
        .map(|m| {
            if !target_done && m.name == behavior_method {
                target_done = true;
                render_method(m, profile, body)
            } else {
                render_stub(m, profile)
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn build_draft(
    spec: &ApiSpec,
    behavior: &Behavior,
    target: &AbstractMethod,
    housing: Housing,
    body_variant: BodyVariant,
    body_operator: Option<OperatorId>,
    mode: ConditionMode,
) -> Result<VariantDraft> {
    let mut alloc = NameAlloc::new();
    let var = alloc.fresh();
    let profile = if body_variant.uses_condition() {
        match mode {
            ConditionMode::Generic => NamingProfile::Generic,
            ConditionMode::ContextSpecific => NamingProfile::Context,
        }
    } else {
        NamingProfile::Canonical
    };
    let body = render_body(
        body_variant,
        target,
        &behavior.neutral_outcome,
        mode,
        profile,
        &mut alloc,
    )?;
    let methods = render_methods(spec, &behavior.method, &body, profile);
    let api = spec.simple_name();
    let link = direct_link(spec);

    let (helpers, binding, mut fresh) = match housing {
        Housing::DirectNamed => {
            let helper = render_class(&format!("class MascHelper1 {link} {api}"), &methods);
            (
                vec![helper],
                named_binding(api, "MascHelper1", &var),
                vec!["MascHelper1".to_string()],
            )
        }
        Housing::AbstractPair => {
            let parent = render_class(&format!("abstract class MascHelper1 {link} {api}"), &[]);
            let child = render_class("class MascHelper2 extends MascHelper1", &methods);
            (
                vec![parent, child],
                named_binding(api, "MascHelper2", &var),
                vec!["MascHelper1".to_string(), "MascHelper2".to_string()],
            )
        }
        Housing::AnonymousDirect => {
            (Vec::new(), anonymous_binding(api, api, &methods, &var), Vec::new())
        }
        Housing::AnonymousViaInterface => {
            if spec.type_form == Some(TypeForm::AbstractClass) {
                return Err(Error::IncompatibleForm {
                    api: spec.qualified_name.clone(),
                    form: "interface-extension housing".into(),
                    detail: "an interface cannot extend an abstract class".into(),
                });
            }
            let helper = render_class(&format!("interface MascHelper1 extends {api}"), &[]);
            (
                vec![helper],
                anonymous_binding(api, "MascHelper1", &methods, &var),
                vec!["MascHelper1".to_string()],
            )
        }
        Housing::AnonymousViaAbstract => {
            let helper = render_class(&format!("abstract class MascHelper1 {link} {api}"), &[]);
            (
                vec![helper],
                anonymous_binding(api, "MascHelper1", &methods, &var),
                vec!["MascHelper1".to_string()],
            )
        }
    };
    fresh.push(var);

    // Housing-operator mutants add T3 for the structural indirection; the
    // implicit named class around standalone OP7–OP9 is not itself the
    // evasion under test, so those keep the body's own tags.
    let mut tags = body_variant.tags();
    if body_operator.is_some() && housing.adds_t3() && !tags.contains(&ThreatTag::T3) {
        tags.push(ThreatTag::T3);
    }
    tags.sort();

    let mut label = String::new();
    if body_operator.is_some() {
        label.push_str(housing.label());
        label.push('+');
    }
    label.push_str(body_variant.label());

    Ok(VariantDraft {
        label,
        helpers,
        statements: vec![binding.clone()],
        declaration: Some(binding),
        fresh_names: fresh,
        threat_tags: tags,
        condition_mode: body_variant.uses_condition().then_some(mode),
        body_operator,
        ..Default::default()
    })
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

fn behavior_of<'a>(case: &'a MisuseCase) -> Result<&'a Behavior> {
    case.behavior.as_ref().ok_or_else(|| Error::InvalidCase {
        case_id: case.id.clone(),
        detail: "flexible case has no behavior".into(),
    })
}

/// Body operator OP10–OP12 should compose: configured, else the case's first
/// applicable OP7–OP9.
fn resolve_body_op(case: &MisuseCase, config: &OperatorConfig) -> Result<OperatorId> {
    if let Some(op) = config.body_operator {
        if !op.is_body_operator() || !case.applicable_operators.contains(&op) {
            return Err(Error::InapplicableOperator {
                case_id: case.id.clone(),
                operator: format!("{op} (as body operator)"),
            });
        }
        return Ok(op);
    }
    OperatorId::ALL
        .into_iter()
        .find(|op| op.is_body_operator() && case.applicable_operators.contains(op))
        .ok_or_else(|| Error::InapplicableOperator {
            case_id: case.id.clone(),
            operator: "OP10-OP12 (no applicable body operator)".into(),
        })
}

pub(crate) fn emit(
    case: &MisuseCase,
    spec: &ApiSpec,
    _model: &ApiModel,
    operator: OperatorId,
    config: &OperatorConfig,
) -> Result<Vec<VariantDraft>> {
    let behavior = behavior_of(case)?;
    let target = spec.find_method(&behavior.method).ok_or_else(|| {
        Error::InvalidModel(format!(
            "behavior method `{}` missing from API `{}`",
            behavior.method, spec.qualified_name
        ))
    })?;
    let mode = config.condition_mode;

    match operator {
        OperatorId::Op7 | OperatorId::Op8 | OperatorId::Op9 => {
            body_variants_for(case, operator, &behavior.neutral_outcome)?
                .into_iter()
                .map(|bv| {
                    build_draft(spec, behavior, target, Housing::DirectNamed, bv, None, mode)
                })
                .collect()
        }
        OperatorId::Op10 | OperatorId::Op11 => {
            let body_op = resolve_body_op(case, config)?;
            let housing = if operator == OperatorId::Op10 {
                Housing::AbstractPair
            } else {
                Housing::DirectNamed
            };
            body_variants_for(case, body_op, &behavior.neutral_outcome)?
                .into_iter()
                .map(|bv| build_draft(spec, behavior, target, housing, bv, Some(body_op), mode))
                .collect()
        }
        OperatorId::Op12 => {
            let body_op = resolve_body_op(case, config)?;
            let housings: &[Housing] = if spec.type_form == Some(TypeForm::AbstractClass) {
                &[Housing::AnonymousDirect, Housing::AnonymousViaAbstract]
            } else {
                &[
                    Housing::AnonymousDirect,
                    Housing::AnonymousViaInterface,
                    Housing::AnonymousViaAbstract,
                ]
            };
            let mut drafts = Vec::new();
            // Body-variant major, housing minor: the default cap surfaces
            // every housing shape before condition-guarded bodies repeat.
            for bv in body_variants_for(case, body_op, &behavior.neutral_outcome)? {
                for &housing in housings {
                    drafts.push(build_draft(
                        spec,
                        behavior,
                        target,
                        housing,
                        bv,
                        Some(body_op),
                        mode,
                    )?);
                }
            }
            Ok(drafts)
        }
        other => Err(Error::InapplicableOperator {
            case_id: case.id.clone(),
            operator: other.to_string(),
        }),
    }
}

/// Base instantiation of a flexible case: anonymous class with every method
/// stubbed to its neutral body — the most literal trust-everything object.
pub(crate) fn base_draft(case: &MisuseCase, spec: &ApiSpec) -> Result<VariantDraft> {
    behavior_of(case)?;
    let mut alloc = NameAlloc::new();
    let var = alloc.fresh();
    let methods: Vec<String> = spec
        .abstract_methods
        .iter()
        .map(|m| render_stub(m, NamingProfile::Canonical))
        .collect();
    let binding = anonymous_binding(spec.simple_name(), spec.simple_name(), &methods, &var);
    Ok(VariantDraft {
        label: "base".into(),
        statements: vec![binding.clone()],
        declaration: Some(binding),
        fresh_names: vec![var],
        threat_tags: case.threat_tags.clone(),
        ..Default::default()
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::api_model::ApiModel;
    use crate::mutation::{apply_operator, base_instantiation};
    use crate::taxonomy::Registry;

    fn ctx() -> (&'static Registry, &'static ApiModel, OperatorConfig) {
        let r = Registry::bundled();
        (r, ApiModel::bundled(), OperatorConfig::for_registry(r))
    }

    fn method<'a>(api: &str, name: &str) -> &'a AbstractMethod {
        ApiModel::bundled()
            .lookup(api)
            .unwrap()
            .find_method(name)
            .unwrap()
    }

    #[test]
    fn generic_never_true_condition() {
        let m = method("javax.net.ssl.X509TrustManager", "checkServerTrusted");
        assert_eq!(
            condition_text(ConditionMode::Generic, m, ConditionPolarity::NeverTrue).unwrap(),
            "!(true||arg0 == null||arg1 == null)"
        );
    }

    #[test]
    fn generic_always_true_condition() {
        let m = method("javax.net.ssl.HostnameVerifier", "verify");
        assert_eq!(
            condition_text(ConditionMode::Generic, m, ConditionPolarity::AlwaysTrue).unwrap(),
            "true || session == null"
        );
    }

    #[test]
    fn context_conditions() {
        let hv = method("javax.net.ssl.HostnameVerifier", "verify");
        assert_eq!(
            condition_text(ConditionMode::ContextSpecific, hv, ConditionPolarity::AlwaysTrue)
                .unwrap(),
            "true || session.getCipherSuite().length()>=0"
        );
        let tm = method("javax.net.ssl.X509TrustManager", "checkServerTrusted");
        assert_eq!(
            condition_text(ConditionMode::ContextSpecific, tm, ConditionPolarity::NeverTrue)
                .unwrap(),
            "!(true || null != s || s.equalsIgnoreCase(\"RSA\") || certs.length >= 314)"
        );
    }

    #[test]
    fn condition_unavailable_without_parameters() {
        let m = method("javax.net.ssl.X509TrustManager", "getAcceptedIssuers");
        let err =
            condition_text(ConditionMode::Generic, m, ConditionPolarity::NeverTrue).unwrap_err();
        assert!(matches!(err, Error::ConditionUnavailable { .. }));
        let err =
            condition_text(ConditionMode::ContextSpecific, m, ConditionPolarity::AlwaysTrue)
                .unwrap_err();
        assert!(matches!(err, Error::ConditionUnavailable { .. }));
    }

    #[test]
    fn op8_constant_return_in_named_housing() {
        let (r, m, c) = ctx();
        let mutants = apply_operator(
            r.case("hostname-verifier-true").unwrap(),
            OperatorId::Op8,
            m,
            &c,
        )
        .unwrap();
        // Standalone body operators live in a named implementation class.
        let helper = &mutants[0].snippet.helper_declarations[0];
        let squashed: String = helper.split_whitespace().collect();
        assert!(
            squashed.starts_with("classMascHelper1implementsHostnameVerifier{"),
            "got:\n{helper}"
        );
        assert!(squashed.contains("publicbooleanverify(Stringh,SSLSessions){returntrue;}"));
        assert_eq!(
            mutants[0].snippet.statements,
            ["HostnameVerifier mascVar1 = new MascHelper1();"]
        );
        assert_eq!(mutants[0].threat_tags, [ThreatTag::T1]);
        assert_eq!(mutants[1].variant_label, "premature-return");
        assert!(mutants[1].snippet.helper_declarations[0]
            .contains("if (true || session == null) {"));
        assert_eq!(mutants[1].condition_mode, Some(ConditionMode::Generic));
    }

    #[test]
    fn op12_anonymous_direct_matches_published_shape() {
        let (r, m, c) = ctx();
        let mutants = apply_operator(
            r.case("hostname-verifier-true").unwrap(),
            OperatorId::Op12,
            m,
            &c,
        )
        .unwrap();
        let binding = &mutants[0].snippet.statements[0];
        let squashed: String = binding.split_whitespace().collect();
        assert!(
            squashed.contains("newHostnameVerifier(){"),
            "got:\n{binding}"
        );
        assert!(squashed.contains("publicbooleanverify(Stringh,SSLSessions){returntrue;}"));
        assert!(binding.ends_with("};"));
    }

    #[test]
    fn op7_variants_for_trust_manager() {
        let (r, m, c) = ctx();
        let mutants = apply_operator(
            r.case("trust-all-trustmanager").unwrap(),
            OperatorId::Op7,
            m,
            &c,
        )
        .unwrap();
        assert_eq!(mutants.len(), 2);
        let silent = &mutants[0].snippet.helper_declarations[0];
        let squashed: String = silent.split_whitespace().collect();
        assert!(squashed.contains(
            "publicvoidcheckServerTrusted(X509Certificate[]chain,StringauthType)throwsCertificateException{}"
        ));
        let guarded = &mutants[1].snippet.helper_declarations[0];
        assert!(guarded.contains("if (!(true||arg0 == null||arg1 == null)) {"));
        assert!(guarded.contains("throw new CertificateException();"));
    }

    #[test]
    fn op7_context_mode_decorates_throw() {
        let (r, m, mut c) = ctx();
        c.condition_mode = ConditionMode::ContextSpecific;
        let mutants = apply_operator(
            r.case("trust-all-trustmanager").unwrap(),
            OperatorId::Op7,
            m,
            &c,
        )
        .unwrap();
        let guarded = &mutants[1].snippet.helper_declarations[0];
        assert!(guarded.contains(
            "if (!(true || null != s || s.equalsIgnoreCase(\"RSA\") || certs.length >= 314)) {"
        ));
        assert!(guarded.contains("throw new CertificateException(\"RSA\");"));
        // Context profile renames the parameters consistently.
        assert!(guarded.contains("checkServerTrusted(X509Certificate[] certs, String s)"));
    }

    #[test]
    fn op9_loops_over_array_parameter() {
        let (r, m, c) = ctx();
        let mutants = apply_operator(
            r.case("trust-all-trustmanager").unwrap(),
            OperatorId::Op9,
            m,
            &c,
        )
        .unwrap();
        let helper = &mutants[0].snippet.helper_declarations[0];
        assert!(helper.contains("int mascVar2 = 0;"));
        assert!(helper.contains("for (X509Certificate mascVar3 : chain) {"));
        assert!(helper.contains("mascVar2++;"));
        // HostnameVerifier has no array parameter: literal counting loop,
        // and the constant verdict still gets returned.
        let hv = apply_operator(
            r.case("hostname-verifier-true").unwrap(),
            OperatorId::Op9,
            m,
            &c,
        )
        .unwrap();
        let body = &hv[0].snippet.helper_declarations[0];
        assert!(body.contains("for (int mascVar3 = 0; mascVar3 < 10; mascVar3++) {"));
        assert!(body.contains("return true;"));
    }

    #[test]
    fn op10_builds_abstract_pair() {
        let (r, m, c) = ctx();
        let mutants = apply_operator(
            r.case("trust-all-trustmanager").unwrap(),
            OperatorId::Op10,
            m,
            &c,
        )
        .unwrap();
        let helpers = &mutants[0].snippet.helper_declarations;
        assert_eq!(helpers.len(), 2);
        let parent: String = helpers[0].split_whitespace().collect();
        assert_eq!(parent, "abstractclassMascHelper1implementsX509TrustManager{}");
        assert!(helpers[1].starts_with("class MascHelper2 extends MascHelper1 {"));
        assert_eq!(
            mutants[0].snippet.statements,
            ["X509TrustManager mascVar1 = new MascHelper2();"]
        );
        assert_eq!(mutants[0].body_operator_id, Some(OperatorId::Op7));
        assert_eq!(mutants[0].threat_tags, [ThreatTag::T1, ThreatTag::T3]);
        assert_eq!(
            mutants[0].fresh_names,
            ["MascHelper1", "MascHelper2", "mascVar1"]
        );
    }

    #[test]
    fn op12_surfaces_every_housing_first() {
        let (r, m, c) = ctx();
        let mutants = apply_operator(
            r.case("hostname-verifier-true").unwrap(),
            OperatorId::Op12,
            m,
            &c,
        )
        .unwrap();
        let labels: Vec<&str> = mutants.iter().map(|mu| mu.variant_label.as_str()).collect();
        assert_eq!(
            labels,
            [
                "anonymous-direct+constant-return",
                "anonymous-via-interface+constant-return",
                "anonymous-via-abstract+constant-return"
            ]
        );
        let via_interface: String = mutants[1].snippet.helper_declarations[0]
            .split_whitespace()
            .collect();
        assert_eq!(via_interface, "interfaceMascHelper1extendsHostnameVerifier{}");
        assert!(mutants[1].snippet.statements[0]
            .starts_with("HostnameVerifier mascVar1 = new MascHelper1() {"));
        // Direct anonymous housing keeps the body's own tags.
        assert_eq!(mutants[0].threat_tags, [ThreatTag::T1]);
        assert_eq!(mutants[1].threat_tags, [ThreatTag::T1, ThreatTag::T3]);
    }

    #[test]
    fn op12_on_abstract_class_skips_interface_housing() {
        let (r, m, c) = ctx();
        let mutants = apply_operator(
            r.case("extended-trustmanager-trust-all").unwrap(),
            OperatorId::Op12,
            m,
            &c,
        )
        .unwrap();
        let labels: Vec<&str> = mutants.iter().map(|mu| mu.variant_label.as_str()).collect();
        assert_eq!(
            labels,
            [
                "anonymous-direct+silent-handler",
                "anonymous-via-abstract+silent-handler",
                "anonymous-direct+unreachable-throw"
            ]
        );
        let via_abstract = &mutants[1].snippet.helper_declarations[0];
        let squashed: String = via_abstract.split_whitespace().collect();
        assert_eq!(
            squashed,
            "abstractclassMascHelper1extendsX509ExtendedTrustManager{}"
        );
        // All seven abstract methods materialize in the anonymous body.
        let binding = &mutants[0].snippet.statements[0];
        assert_eq!(binding.matches("public void checkClientTrusted").count(), 3);
        assert_eq!(binding.matches("public void checkServerTrusted").count(), 3);
        assert_eq!(binding.matches("getAcceptedIssuers").count(), 1);
    }

    #[test]
    fn configured_body_operator_is_honored_and_validated() {
        let (r, m, mut c) = ctx();
        c.body_operator = Some(OperatorId::Op9);
        let mutants = apply_operator(
            r.case("trust-all-trustmanager").unwrap(),
            OperatorId::Op11,
            m,
            &c,
        )
        .unwrap();
        assert_eq!(mutants.len(), 1);
        assert_eq!(mutants[0].body_operator_id, Some(OperatorId::Op9));
        assert!(mutants[0].snippet.helper_declarations[0].contains("for (X509Certificate"));

        // OP8 needs a constant-return behavior; trust managers suppress.
        c.body_operator = Some(OperatorId::Op8);
        let err = apply_operator(
            r.case("trust-all-trustmanager").unwrap(),
            OperatorId::Op11,
            m,
            &c,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InapplicableOperator { .. }));
    }

    #[test]
    fn flexible_base_is_all_neutral_anonymous_object() {
        let (r, m, _) = ctx();
        let base =
            base_instantiation(r.case("hostname-verifier-true").unwrap(), m).unwrap();
        let squashed: String = base.snippet.statements[0].split_whitespace().collect();
        assert_eq!(
            squashed,
            "HostnameVerifiermascVar1=newHostnameVerifier(){publicbooleanverify(Stringh,SSLSessions){returntrue;}};"
        );
        assert!(base.snippet.declaration.is_some());
        assert_eq!(base.glue.placement_kinds.len(), 6);
    }

    #[test]
    fn flexible_statement_and_declaration_share_text() {
        let (r, m, c) = ctx();
        for op in [OperatorId::Op7, OperatorId::Op12] {
            for mutant in
                apply_operator(r.case("trust-all-trustmanager").unwrap(), op, m, &c).unwrap()
            {
                assert_eq!(
                    mutant.snippet.declaration.as_deref(),
                    Some(mutant.snippet.statements[0].as_str()),
                    "{}",
                    mutant.id
                );
            }
        }
    }
}
