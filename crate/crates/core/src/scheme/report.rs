use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::groups::GroupElement;

/// What a failed clause points at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub elements: Vec<GroupElement>,
    pub detail: String,
}

impl Witness {
    pub fn new(elements: Vec<GroupElement>, detail: impl Into<String>) -> Self {
        Witness { elements, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail { witness: Witness },
}

impl Verdict {
    pub fn fail(elements: Vec<GroupElement>, detail: impl Into<String>) -> Self {
        Verdict::Fail { witness: Witness::new(elements, detail) }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail { witness } => Some(witness),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub clause: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub clauses: Vec<Clause>,
}

impl LevelReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.verdict.is_pass())
    }

    pub fn clause(&self, name: &str) -> Option<&Verdict> {
        self.clauses.iter().find(|c| c.clause == name).map(|c| &c.verdict)
    }
}

/// Outcome of one checker over every level of a scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub parameters: BTreeMap<String, String>,
    pub levels: Vec<LevelReport>,
    /// Clauses about the whole sequence rather than a single level.
    pub global: Vec<Clause>,
    #[serde(skip_serializing_if = "Vec::is_empty", serialize_with = "ratios")]
    pub growth: Vec<BigRational>,
    pub pass: bool,
}

fn ratios<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

impl ConditionReport {
    pub fn new(condition: &str) -> Self {
        ConditionReport {
            condition: condition.into(),
            parameters: BTreeMap::new(),
            levels: Vec::new(),
            global: Vec::new(),
            growth: Vec::new(),
            pass: false,
        }
    }

    /// Sets `pass` to the conjunction of every clause.
    pub fn finish(mut self) -> Self {
        self.pass = self.levels.iter().all(LevelReport::passed) && self.global.iter().all(|c| c.verdict.is_pass());
        self
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, level: usize, clause: &str, verdict: Verdict) {
        let c = Clause { clause: clause.into(), verdict };
        match self.levels.iter_mut().find(|l| l.level == level) {
            Some(l) => l.clauses.push(c),
            None => self.levels.push(LevelReport { level, clauses: vec![c] }),
        }
    }

    pub fn push_global(&mut self, clause: &str, verdict: Verdict) {
        self.global.push(Clause { clause: clause.into(), verdict });
    }

    pub fn level(&self, n: usize) -> Option<&LevelReport> {
        self.levels.iter().find(|l| l.level == n)
    }

    /// First failing clause in level order, then global clauses.
    pub fn first_failure(&self) -> Option<(Option<usize>, &Clause)> {
        for l in &self.levels {
            if let Some(c) = l.clauses.iter().find(|c| !c.verdict.is_pass()) {
                return Some((Some(l.level), c));
            }
        }
        self.global.iter().find(|c| !c.verdict.is_pass()).map(|c| (None, c))
    }
}
