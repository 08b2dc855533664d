//! Restrictive operators OP1–OP6: argument transformations on factory
//! calls whose effective value stays a registered insecure argument.

use crate::api_model::{ApiSpec, FactoryInvocation};
use crate::error::{Error, Result};
use crate::mutation::{is_registered_insecure, java_string_literal, OperatorConfig, VariantDraft};
use crate::taxonomy::{MisuseCase, OperatorId, ThreatTag};

/// Symbolic insecure argument standing for "current wall-clock time as a
/// string"; OP6 materializes it and the effective-value oracle folds the
/// materialization back to this symbol.
pub const SYSTEM_TIME_SYMBOL: &str = "<system-time>";

pub(crate) fn emit(
    case: &MisuseCase,
    spec: &ApiSpec,
    operator: OperatorId,
    config: &OperatorConfig,
) -> Result<Vec<VariantDraft>> {
    let arg = case
        .insecure_arguments
        .get(config.argument_index)
        .or_else(|| case.insecure_arguments.first())
        .ok_or_else(|| Error::InvalidCase {
            case_id: case.id.clone(),
            detail: "restrictive case has no insecure_arguments".into(),
        })?;
    let drafts = match operator {
        OperatorId::Op1 => op1(spec, arg)?,
        OperatorId::Op2 => op2(spec, arg)?,
        OperatorId::Op3 => op3(spec, arg)?,
        OperatorId::Op4 => op4(case, spec, arg, config)?,
        OperatorId::Op5 => op5(spec, arg)?,
        OperatorId::Op6 => op6(case, spec)?,
        other => {
            return Err(Error::InapplicableOperator {
                case_id: case.id.clone(),
                operator: other.to_string(),
            })
        }
    };
    for draft in &drafts {
        debug_assert!(
            draft
                .effective_value
                .as_deref()
                .is_some_and(|v| is_registered_insecure(case, v)),
            "{}/{operator} variant `{}` drifted off the insecure set",
            case.id,
            draft.label,
        );
    }
    Ok(drafts)
}

/// Render `Type.method(...)` / `new Type(...)` around one string expression,
/// applying the factory's adapter and extra arguments.
pub(crate) fn factory_call(spec: &ApiSpec, expr: &str) -> Result<String> {
    let factory = spec.factory.as_ref().ok_or_else(|| Error::InvalidModel(format!(
        "API `{}` has no factory; restrictive emission needs one",
        spec.qualified_name
    )))?;
    let adapted = match &factory.string_adapter {
        Some(adapter) => format!("{expr}.{adapter}"),
        None => expr.to_string(),
    };
    let mut args = Vec::with_capacity(factory.parameter_count);
    let mut extra = factory.extra_arguments.iter();
    for index in 0..factory.parameter_count {
        if index == factory.string_parameter_index {
            args.push(adapted.clone());
        } else {
            args.push(extra.next().cloned().unwrap_or_else(|| "null".into()));
        }
    }
    let arglist = args.join(", ");
    Ok(match factory.invocation {
        FactoryInvocation::StaticMethod => {
            format!("{}.{}({arglist})", spec.simple_name(), factory.name)
        }
        FactoryInvocation::Constructor => format!("new {}({arglist})", factory.name),
    })
}

pub(crate) fn factory_statement(spec: &ApiSpec, expr: &str) -> Result<String> {
    Ok(format!("{};", factory_call(spec, expr)?))
}

fn single_expression_draft(
    spec: &ApiSpec,
    label: &str,
    expr: String,
    effective: String,
    tags: &[ThreatTag],
) -> Result<VariantDraft> {
    Ok(VariantDraft {
        label: label.into(),
        statements: vec![factory_statement(spec, &expr)?],
        effective_value: Some(effective),
        argument_expr: Some(expr),
        threat_tags: tags.to_vec(),
        ..Default::default()
    })
}

// -- OP1: case transformation ----------------------------------------------

fn all_lower(arg: &str) -> String {
    arg.to_lowercase()
}

fn first_lower(arg: &str) -> String {
    let mut done = false;
    arg.chars()
        .map(|c| {
            if !done && c.is_alphabetic() {
                done = true;
                c.to_lowercase().next().unwrap_or(c)
            } else {
                c
            }
        })
        .collect()
}

fn alternating_case(arg: &str) -> String {
    let mut lower = true;
    arg.chars()
        .map(|c| {
            if c.is_alphabetic() {
                let mapped = if lower {
                    c.to_lowercase().next().unwrap_or(c)
                } else {
                    c.to_uppercase().next().unwrap_or(c)
                };
                lower = !lower;
                mapped
            } else {
                c
            }
        })
        .collect()
}

fn op1(spec: &ApiSpec, arg: &str) -> Result<Vec<VariantDraft>> {
    let shapes = [
        ("all-lower", all_lower(arg)),
        ("first-lower", first_lower(arg)),
        ("alternating-case", alternating_case(arg)),
    ];
    let mut seen = Vec::new();
    let mut drafts = Vec::new();
    for (label, value) in shapes {
        if value == arg || seen.contains(&value) {
            continue;
        }
        seen.push(value.clone());
        drafts.push(single_expression_draft(
            spec,
            label,
            java_string_literal(&value),
            value,
            &[ThreatTag::T1],
        )?);
    }
    Ok(drafts)
}

// -- OP2: value behind a variable ------------------------------------------

fn op2(spec: &ApiSpec, arg: &str) -> Result<Vec<VariantDraft>> {
    Ok(vec![VariantDraft {
        label: "variable-reference".into(),
        statements: vec![
            format!("String value = {};", java_string_literal(arg)),
            factory_statement(spec, "value")?,
        ],
        effective_value: Some(arg.to_string()),
        fresh_names: vec!["value".into()],
        threat_tags: vec![ThreatTag::T1],
        ..Default::default()
    }])
}

// -- OP3: case-restoring method call ---------------------------------------

fn op3(spec: &ApiSpec, arg: &str) -> Result<Vec<VariantDraft>> {
    let lower = arg.to_lowercase();
    let effective = lower.to_uppercase();
    let literal = java_string_literal(&lower);
    let mut drafts = vec![single_expression_draft(
        spec,
        "uppercase-default-locale",
        format!("{literal}.toUpperCase()"),
        effective.clone(),
        &[ThreatTag::T2],
    )?];
    // Published exemplar references `Locale.English`, which parses but does
    // not name a real JDK field; kept verbatim and flagged not compile-safe.
    let mut locale = single_expression_draft(
        spec,
        "uppercase-explicit-locale",
        format!("{literal}.toUpperCase(Locale.English)"),
        effective,
        &[ThreatTag::T2],
    )?;
    locale.extra_imports.push("java.util.Locale".into());
    locale.compile_unsafe = true;
    drafts.push(locale);
    Ok(drafts)
}

// -- OP4: replace() laundering ---------------------------------------------

fn noise_variant(spec: &ApiSpec, arg: &str) -> Result<Option<VariantDraft>> {
    let marker = if arg.contains('$') {
        if arg.contains('#') {
            return Ok(None);
        }
        '#'
    } else {
        '$'
    };
    let mut chars: Vec<char> = arg.chars().collect();
    if chars.is_empty() {
        return Ok(None);
    }
    chars.insert(chars.len() - 1, marker);
    let noisy: String = chars.into_iter().collect();
    let expr = format!(
        "{}.replace({}, \"\")",
        java_string_literal(&noisy),
        java_string_literal(&marker.to_string()),
    );
    Ok(Some(single_expression_draft(
        spec,
        "noise-replace",
        expr,
        arg.to_string(),
        &[ThreatTag::T2],
    )?))
}

fn secure_replace_variant(
    case: &MisuseCase,
    spec: &ApiSpec,
    arg: &str,
) -> Result<Option<VariantDraft>> {
    let Some(secure) = case.secure_argument.as_deref() else {
        return Ok(None);
    };
    if secure == arg {
        return Ok(None);
    }
    let expr = format!(
        "{}.replace({}, {})",
        java_string_literal(secure),
        java_string_literal(secure),
        java_string_literal(arg),
    );
    Ok(Some(single_expression_draft(
        spec,
        "secure-replace",
        expr,
        arg.to_string(),
        &[ThreatTag::T2],
    )?))
}

/// Find a donor insecure value one character away from `arg`, so that a
/// single `replace(old, new)` on the donor lands exactly on `arg`.
fn hamming_one_donor(arg: &str, pool: &[String]) -> Option<(String, char, char)> {
    for donor in pool {
        if donor == arg || donor.chars().count() != arg.chars().count() {
            continue;
        }
        let diffs: Vec<(char, char)> = donor
            .chars()
            .zip(arg.chars())
            .filter(|(d, a)| d != a)
            .collect();
        if let [(from, to)] = diffs[..] {
            // replace() substitutes every occurrence; verify nothing else moves.
            if donor.replace(from, &to.to_string()) == arg {
                return Some((donor.clone(), from, to));
            }
        }
    }
    None
}

fn insecure_replace_variant(
    spec: &ApiSpec,
    arg: &str,
    config: &OperatorConfig,
) -> Result<Option<VariantDraft>> {
    let Some((donor, from, to)) = hamming_one_donor(arg, &config.donor_arguments) else {
        return Ok(None);
    };
    let expr = format!(
        "{}.replace({}, {})",
        java_string_literal(&donor),
        java_string_literal(&from.to_string()),
        java_string_literal(&to.to_string()),
    );
    Ok(Some(single_expression_draft(
        spec,
        "insecure-replace",
        expr,
        arg.to_string(),
        &[ThreatTag::T2],
    )?))
}

fn op4(
    case: &MisuseCase,
    spec: &ApiSpec,
    arg: &str,
    config: &OperatorConfig,
) -> Result<Vec<VariantDraft>> {
    let mut drafts = Vec::new();
    drafts.extend(noise_variant(spec, arg)?);
    drafts.extend(secure_replace_variant(case, spec, arg)?);
    drafts.extend(insecure_replace_variant(spec, arg, config)?);
    Ok(drafts)
}

// -- OP5: fluent helper chain ----------------------------------------------

const OP5_FIELD_INIT: &str = "AES/CBC/PKCS5Padding";
const OP5_DECOY: &str = "AES";

fn op5(spec: &ApiSpec, arg: &str) -> Result<Vec<VariantDraft>> {
    let helper = format!(
        "class MascHelper1 {{\n    String algo = {init};\n    MascHelper1 mthd1() {{\n        algo = {decoy};\n        return this;\n    }}\n    MascHelper1 mthd2() {{\n        algo = {value};\n        return this;\n    }}\n    String getValue() {{\n        return algo;\n    }}\n}}",
        init = java_string_literal(OP5_FIELD_INIT),
        decoy = java_string_literal(OP5_DECOY),
        value = java_string_literal(arg),
    );
    Ok(vec![VariantDraft {
        label: "helper-chain".into(),
        helpers: vec![helper],
        statements: vec![factory_statement(
            spec,
            "new MascHelper1().mthd1().mthd2().getValue()",
        )?],
        effective_value: Some(arg.to_string()),
        fresh_names: vec!["MascHelper1".into()],
        threat_tags: vec![ThreatTag::T3],
        ..Default::default()
    }])
}

// -- OP6: runtime-constructed values ---------------------------------------

/// A string whose chars form one contiguous ascending codepoint run
/// ("ABCDEFGHIJ") can be rebuilt by a counting loop.
fn char_range(arg: &str) -> Option<(u32, u32)> {
    let mut chars = arg.chars();
    let first = chars.next()?;
    if !first.is_ascii_alphanumeric() {
        return None;
    }
    let mut expected = first as u32;
    let mut count = 1u32;
    for c in chars {
        expected += 1;
        if c as u32 != expected || !c.is_ascii() {
            return None;
        }
        count += 1;
    }
    if count < 2 {
        return None;
    }
    Some((first as u32, first as u32 + count))
}

fn op6(case: &MisuseCase, spec: &ApiSpec) -> Result<Vec<VariantDraft>> {
    let mut drafts = Vec::new();
    for arg in &case.insecure_arguments {
        if arg == SYSTEM_TIME_SYMBOL {
            drafts.push(VariantDraft {
                label: "system-time".into(),
                statements: vec![
                    "String val = new Date(System.currentTimeMillis()).toString();".into(),
                    factory_statement(spec, "val")?,
                ],
                effective_value: Some(SYSTEM_TIME_SYMBOL.into()),
                extra_imports: vec!["java.util.Date".into()],
                fresh_names: vec!["val".into()],
                threat_tags: vec![ThreatTag::T1],
                ..Default::default()
            });
        } else if let Some((start, end)) = char_range(arg) {
            drafts.push(VariantDraft {
                label: "char-range-loop".into(),
                statements: vec![
                    "String v = \"\";".into(),
                    format!(
                        "for (int i = {start}; i < {end}; i++) {{\n    v += (char) i;\n}}"
                    ),
                    factory_statement(spec, "v")?,
                ],
                effective_value: Some(arg.clone()),
                fresh_names: vec!["v".into()],
                threat_tags: vec![ThreatTag::T1],
                ..Default::default()
            });
        }
    }
    if drafts.is_empty() {
        return Err(Error::InapplicableOperator {
            case_id: case.id.clone(),
            operator: "OP6 (no argument is loop-constructible or symbolic)".into(),
        });
    }
    Ok(drafts)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
