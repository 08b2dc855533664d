//! Misuse-case taxonomy: a machine-readable registry of crypto-API misuse
//! cases grouped into nine security-goal clusters.
//!
//! The registry is the root input of every pipeline stage. Each case names a
//! target API, how the misuse is expressed (a *restrictive* argument value or
//! a *flexible* behavioral contract), and the mutation operators that can
//! instantiate it. A vetted registry ships embedded in the crate; callers may
//! load their own JSON, which is validated with the same rules (unknown
//! fields are rejected rather than ignored).

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_REGISTRY: &str = include_str!("../data/registry.json");

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

/// Mutation operator identifiers.
///
/// OP1–OP6 are the *restrictive* family (transformations of a value-identity
/// argument); OP7–OP9 are *flexible* method-body operators; OP10–OP12 are
/// *flexible* housing operators whose method bodies come from OP7–OP9.
/// `Base` identifies the literal, untransformed instantiation of a case; it
/// is never listed in `applicable_operators`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorId {
    #[serde(rename = "BASE")]
    Base,
    #[serde(rename = "OP1")]
    Op1,
    #[serde(rename = "OP2")]
    Op2,
    #[serde(rename = "OP3")]
    Op3,
    #[serde(rename = "OP4")]
    Op4,
    #[serde(rename = "OP5")]
    Op5,
    #[serde(rename = "OP6")]
    Op6,
    #[serde(rename = "OP7")]
    Op7,
    #[serde(rename = "OP8")]
    Op8,
    #[serde(rename = "OP9")]
    Op9,
    #[serde(rename = "OP10")]
    Op10,
    #[serde(rename = "OP11")]
    Op11,
    #[serde(rename = "OP12")]
    Op12,
}

impl OperatorId {
    /// The twelve real operators, in order. Excludes `Base`.
    pub const ALL: [OperatorId; 12] = [
        OperatorId::Op1,
        OperatorId::Op2,
        OperatorId::Op3,
        OperatorId::Op4,
        OperatorId::Op5,
        OperatorId::Op6,
        OperatorId::Op7,
        OperatorId::Op8,
        OperatorId::Op9,
        OperatorId::Op10,
        OperatorId::Op11,
        OperatorId::Op12,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorId::Base => "BASE",
            OperatorId::Op1 => "OP1",
            OperatorId::Op2 => "OP2",
            OperatorId::Op3 => "OP3",
            OperatorId::Op4 => "OP4",
            OperatorId::Op5 => "OP5",
            OperatorId::Op6 => "OP6",
            OperatorId::Op7 => "OP7",
            OperatorId::Op8 => "OP8",
            OperatorId::Op9 => "OP9",
            OperatorId::Op10 => "OP10",
            OperatorId::Op11 => "OP11",
            OperatorId::Op12 => "OP12",
        }
    }

    /// OP1–OP6: argument-value transformations on factory-style APIs.
    pub fn is_restrictive(self) -> bool {
        matches!(
            self,
            OperatorId::Op1
                | OperatorId::Op2
                | OperatorId::Op3
                | OperatorId::Op4
                | OperatorId::Op5
                | OperatorId::Op6
        )
    }

    /// OP7–OP12: behavioral operators on override-style APIs.
    pub fn is_flexible(self) -> bool {
        !self.is_restrictive() && self != OperatorId::Base
    }

    /// OP7–OP9: produce the incorrect method *body*.
    pub fn is_body_operator(self) -> bool {
        matches!(self, OperatorId::Op7 | OperatorId::Op8 | OperatorId::Op9)
    }

    /// OP10–OP12: produce the class *structure* housing an OP7–OP9 body.
    pub fn is_housing_operator(self) -> bool {
        matches!(self, OperatorId::Op10 | OperatorId::Op11 | OperatorId::Op12)
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        OperatorId::ALL
            .iter()
            .copied()
            .chain(std::iter::once(OperatorId::Base))
            .find(|op| op.as_str() == upper)
            .ok_or_else(|| Error::UnknownOperator(s.to_string()))
    }
}

/// Threat-model tags attached to generated mutants.
///
/// T1: accidental misuse a benign developer writes; T2: a benign developer's
/// harmful attempt to fix a flagged issue; T3: deliberately evasive misuse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ThreatTag {
    T1,
    T2,
    T3,
}

impl ThreatTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ThreatTag::T1 => "T1",
            ThreatTag::T2 => "T2",
            ThreatTag::T3 => "T3",
        }
    }
}

/// How a case's misuse is expressed at the API boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiKind {
    /// Factory-style API taking a value-identity argument (`getInstance`).
    Restrictive,
    /// Interface/abstract-class API misused by overriding behavior.
    Flexible,
}

// ---------------------------------------------------------------------------
// Registry schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cluster {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetApi {
    /// Fully qualified type name, e.g. `javax.crypto.Cipher`.
    #[serde(rename = "type")]
    pub type_name: String,
    /// Factory member for restrictive cases (`getInstance`, or `new` for
    /// constructor-style factories). Absent for flexible cases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<String>,
}

/// The behavioral contract a flexible case subverts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Behavior {
    /// Abstract method whose override carries the misuse.
    pub method: String,
    pub neutral_outcome: NeutralOutcome,
}

/// The "neutral" (trust-everything) outcome of the subverted method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NeutralOutcome {
    /// Correct behavior throws on invalid input; the misuse never throws.
    SuppressException { exception: String },
    /// Correct behavior returns a verdict; the misuse returns a constant.
    ConstantReturn { value: String },
}

fn default_threat_tags() -> Vec<ThreatTag> {
    vec![ThreatTag::T1]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MisuseCase {
    pub id: String,
    pub title: String,
    /// Declared cluster id.
    pub cluster: String,
    pub api_kind: ApiKind,
    pub target_api: TargetApi,
    /// Known-insecure argument values (restrictive cases only, non-empty).
    #[serde(default)]
    pub insecure_arguments: Vec<String>,
    /// A secure counterpart value, when one exists (drives OP4's
    /// secure-to-insecure replacement variant).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secure_argument: Option<String>,
    /// Behavioral contract (flexible cases only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<Behavior>,
    pub applicable_operators: Vec<OperatorId>,
    /// Default tags; operator application overrides them per mutant.
    #[serde(default = "default_threat_tags")]
    pub threat_tags: Vec<ThreatTag>,
    /// Whether the case is part of the vetted mutation set.
    pub selected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub version: u32,
    pub clusters: Vec<Cluster>,
    pub cases: Vec<MisuseCase>,
}

/// Filter for [`Registry::list_cases`]. Empty filter matches everything.
#[derive(Debug, Clone, Default)]
pub struct CaseFilter {
    pub cluster: Option<String>,
    pub operator: Option<OperatorId>,
    pub api_kind: Option<ApiKind>,
    pub selected_only: bool,
}

// ---------------------------------------------------------------------------
// Loading & validation
// ---------------------------------------------------------------------------

/// Number of clusters a registry must declare.
pub const CLUSTER_COUNT: usize = 9;
/// Minimum number of selected cases a registry must carry.
pub const MIN_SELECTED_CASES: usize = 19;

impl Registry {
    /// The embedded, vetted registry.
    pub fn bundled() -> &'static Registry {
        static REG: OnceLock<Registry> = OnceLock::new();
        REG.get_or_init(|| {
            let reg: Registry =
                serde_json::from_str(BUNDLED_REGISTRY).expect("bundled registry must parse");
            reg.validate().expect("bundled registry must validate");
            reg
        })
    }

    /// Parse and validate registry JSON from a string.
    pub fn from_json(text: &str, origin: &Path) -> Result<Registry> {
        let reg: Registry =
            serde_json::from_str(text).map_err(|e| Error::json(origin.to_path_buf(), e))?;
        reg.validate()?;
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Registry> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        Registry::from_json(&text, path)
    }

    pub fn case(&self, id: &str) -> Result<&MisuseCase> {
        self.cases
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::UnknownCase(id.to_string()))
    }

    pub fn cluster(&self, id: &str) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    pub fn selected_cases(&self) -> impl Iterator<Item = &MisuseCase> {
        self.cases.iter().filter(|c| c.selected)
    }

    /// All distinct literal insecure argument values across the registry,
    /// sorted. Symbolic values (angle-bracketed placeholders) are excluded.
    /// Used as the donor pool for OP4's insecure-to-insecure replacement.
    pub fn donor_pool(&self) -> Vec<String> {
        let mut pool: Vec<String> = self
            .cases
            .iter()
            .flat_map(|c| c.insecure_arguments.iter().cloned())
            .filter(|v| !v.starts_with('<'))
            .collect();
        pool.sort();
        pool.dedup();
        pool
    }

    /// List cases matching every populated filter field.
    ///
    /// A cluster filter must name a declared cluster; operator names are
    /// validated at parse time by [`OperatorId::from_str`].
    pub fn list_cases(&self, filter: &CaseFilter) -> Result<Vec<&MisuseCase>> {
        if let Some(cluster) = &filter.cluster {
            if self.cluster(cluster).is_none() {
                return Err(Error::UnknownCluster(cluster.clone()));
            }
        }
        Ok(self
            .cases
            .iter()
            .filter(|c| filter.cluster.as_deref().is_none_or(|cl| c.cluster == cl))
            .filter(|c| {
                filter
                    .operator
                    .is_none_or(|op| c.applicable_operators.contains(&op))
            })
            .filter(|c| filter.api_kind.is_none_or(|k| c.api_kind == k))
            .filter(|c| !filter.selected_only || c.selected)
            .collect())
    }

    /// Enforce every structural and per-case invariant.
    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::InvalidRegistry(format!(
                "unsupported registry version {} (expected 1)",
                self.version
            )));
        }
        if self.clusters.len() != CLUSTER_COUNT {
            return Err(Error::InvalidRegistry(format!(
                "expected exactly {CLUSTER_COUNT} clusters, found {}",
                self.clusters.len()
            )));
        }
        let mut cluster_ids = HashSet::new();
        for cluster in &self.clusters {
            if !cluster_ids.insert(cluster.id.as_str()) {
                return Err(Error::InvalidRegistry(format!(
                    "duplicate cluster id `{}`",
                    cluster.id
                )));
            }
        }

        let mut case_ids = HashSet::new();
        for case in &self.cases {
            case.validate(&cluster_ids)?;
            if !case_ids.insert(case.id.as_str()) {
                return Err(Error::InvalidRegistry(format!(
                    "duplicate case id `{}`",
                    case.id
                )));
            }
        }

        let selected: Vec<&MisuseCase> = self.selected_cases().collect();
        if selected.len() < MIN_SELECTED_CASES {
            return Err(Error::InvalidRegistry(format!(
                "only {} cases are selected for mutation (minimum {MIN_SELECTED_CASES})",
                selected.len()
            )));
        }
        let covered: HashSet<&str> = selected.iter().map(|c| c.cluster.as_str()).collect();
        if covered.len() != CLUSTER_COUNT {
            let missing: Vec<&str> = self
                .clusters
                .iter()
                .map(|c| c.id.as_str())
                .filter(|id| !covered.contains(id))
                .collect();
            return Err(Error::InvalidRegistry(format!(
                "selected cases leave clusters uncovered: {}",
                missing.join(", ")
            )));
        }
        Ok(())
    }
}

impl MisuseCase {
    fn validate(&self, declared_clusters: &HashSet<&str>) -> Result<()> {
        let fail = |detail: String| {
            Err(Error::InvalidCase {
                case_id: self.id.clone(),
                detail,
            })
        };
        if !declared_clusters.contains(self.cluster.as_str()) {
            return fail(format!("references undeclared cluster `{}`", self.cluster));
        }
        if self.applicable_operators.contains(&OperatorId::Base) {
            return fail("BASE is not an applicable operator".into());
        }
        if self.selected && self.applicable_operators.is_empty() {
            return fail("selected case lists no applicable operators".into());
        }
        if self.threat_tags.is_empty() {
            return fail("threat_tags must not be empty".into());
        }
        match self.api_kind {
            ApiKind::Restrictive => {
                if self.insecure_arguments.is_empty() {
                    return fail("restrictive case has no insecure_arguments".into());
                }
                if self.behavior.is_some() {
                    return fail("restrictive case must not declare a behavior".into());
                }
                if self.target_api.member.is_none() {
                    return fail("restrictive case must name a factory member".into());
                }
                if let Some(op) = self
                    .applicable_operators
                    .iter()
                    .find(|op| !op.is_restrictive())
                {
                    return fail(format!("{op} is not a restrictive operator"));
                }
            }
            ApiKind::Flexible => {
                if self.behavior.is_none() {
                    return fail("flexible case must declare a behavior".into());
                }
                if !self.insecure_arguments.is_empty() {
                    return fail("flexible case must not list insecure_arguments".into());
                }
                if let Some(op) = self
                    .applicable_operators
                    .iter()
                    .find(|op| !op.is_flexible())
                {
                    return fail(format!("{op} is not a flexible operator"));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn reparse(mutator: impl FnOnce(&mut serde_json::Value)) -> Result<Registry> {
        let mut value: serde_json::Value = serde_json::from_str(BUNDLED_REGISTRY).unwrap();
        mutator(&mut value);
        Registry::from_json(&value.to_string(), Path::new("<test>"))
    }

    #[test]
    fn bundled_registry_is_valid() {
        let reg = Registry::bundled();
        assert_eq!(reg.clusters.len(), CLUSTER_COUNT);
        assert!(reg.selected_cases().count() >= MIN_SELECTED_CASES);
    }

    #[test]
    fn empty_input_is_a_parse_error() {
        let err = Registry::from_json("", Path::new("<empty>")).unwrap_err();
        assert!(matches!(err, Error::Json { .. }), "got {err:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = reparse(|v| {
            v["cases"][0]["surprise"] = serde_json::json!(true);
        })
        .unwrap_err();
        assert!(matches!(err, Error::Json { .. }), "got {err:?}");
    }

    #[test]
    fn restrictive_case_without_arguments_names_the_case() {
        let err = reparse(|v| {
            v["cases"][0]["insecure_arguments"] = serde_json::json!([]);
        })
        .unwrap_err();
        match err {
            Error::InvalidCase { case_id, detail } => {
                assert_eq!(case_id, "des-cipher");
                assert!(detail.contains("insecure_arguments"));
            }
            other => panic!("expected InvalidCase, got {other:?}"),
        }
    }

    #[test]
    fn undeclared_cluster_is_rejected() {
        let err = reparse(|v| {
            v["cases"][0]["cluster"] = serde_json::json!("quantum");
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidCase { .. }), "got {err:?}");
    }

    #[test]
    fn duplicate_case_ids_are_rejected() {
        let err = reparse(|v| {
            let first = v["cases"][0].clone();
            v["cases"][1] = first;
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidRegistry(_)), "got {err:?}");
    }

    #[test]
    fn cluster_count_is_enforced() {
        let err = reparse(|v| {
            let clusters = v["clusters"].as_array_mut().unwrap();
            clusters.pop();
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidRegistry(_)), "got {err:?}");
    }

    #[test]
    fn flexible_operator_on_restrictive_case_is_rejected() {
        let err = reparse(|v| {
            v["cases"][0]["applicable_operators"] = serde_json::json!(["OP1", "OP12"]);
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidCase { .. }), "got {err:?}");
    }

    #[test]
    fn min_selected_floor_is_enforced() {
        let err = reparse(|v| {
            for case in v["cases"].as_array_mut().unwrap() {
                case["selected"] = serde_json::json!(false);
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidRegistry(_)), "got {err:?}");
    }

    #[test]
    fn list_cases_filters_by_cluster_and_operator() {
        let reg = Registry::bundled();
        let hashing = reg
            .list_cases(&CaseFilter {
                cluster: Some("hashing-mac".into()),
                ..Default::default()
            })
            .unwrap();
        assert!(hashing.iter().any(|c| c.id == "md5-hash"));
        assert!(hashing.iter().all(|c| c.cluster == "hashing-mac"));

        let op12 = reg
            .list_cases(&CaseFilter {
                operator: Some(OperatorId::Op12),
                ..Default::default()
            })
            .unwrap();
        assert!(op12.iter().all(|c| c.api_kind == ApiKind::Flexible));
        assert!(op12.iter().any(|c| c.id == "hostname-verifier-true"));
    }

    #[test]
    fn list_cases_rejects_unknown_cluster() {
        let err = Registry::bundled()
            .list_cases(&CaseFilter {
                cluster: Some("nope".into()),
                ..Default::default()
            })
            .unwrap_err();
        assert!(matches!(err, Error::UnknownCluster(_)), "got {err:?}");
    }

    #[test]
    fn every_operator_covers_at_least_one_selected_case() {
        let reg = Registry::bundled();
        for op in OperatorId::ALL {
            assert!(
                reg.selected_cases()
                    .any(|c| c.applicable_operators.contains(&op)),
                "{op} has no selected case"
            );
        }
    }

    #[test]
    fn operator_parsing_round_trips() {
        for op in OperatorId::ALL {
            assert_eq!(op.as_str().parse::<OperatorId>().unwrap(), op);
        }
        assert!("OP13".parse::<OperatorId>().is_err());
        assert!("op4".parse::<OperatorId>().is_ok());
    }
}
