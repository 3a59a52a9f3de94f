//! Analysis report schema: one JSON document per run.
//!
//! Reports are versioned (`schema`), sorted (apps by path, everything else
//! in `BTreeMap`s), and contain no nondeterministic content besides wall
//! times — so two runs over the same inputs with timings stripped are byte
//! identical, which downstream tooling relies on for caching and diffing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::features::FeatureVector;
use crate::pipeline::PhaseTimings;
use crate::trigger::Trigger;

pub const SCHEMA_VERSION: u32 = 1;

/// Wall-clock milliseconds per pipeline phase.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
pub struct Timings {
    pub parse: f64,
    pub taint: f64,
    pub features: f64,
    pub predict: f64,
}

impl Timings {
    pub fn from_phases(t: PhaseTimings, predict: f64) -> Self {
        Self { parse: t.parse_ms, taint: t.taint_ms, features: t.features_ms, predict }
    }

    fn add(&mut self, other: &Timings) {
        self.parse += other.parse;
        self.taint += other.taint;
        self.features += other.features;
        self.predict += other.predict;
    }
}

/// One scored trigger.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TriggerRecord {
    /// Containing method, e.g. `App.onStart/0`.
    pub method: String,
    pub label: String,
    pub condition: String,
    /// Distinct source signatures the condition depends on, sorted.
    pub sources: Vec<String>,
    pub trigger_type: String,
    pub vector: FeatureVector,
    pub score: f64,
    pub is_outlier: bool,
}

impl TriggerRecord {
    pub fn new(trigger: &Trigger, vector: FeatureVector, score: f64, is_outlier: bool) -> Self {
        let sources: Vec<String> = trigger
            .sources
            .iter()
            .map(|p| p.sig.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        Self {
            method: trigger.method.to_string(),
            label: trigger.label.clone(),
            condition: trigger.condition.clone(),
            sources,
            trigger_type: trigger.trigger_type.clone(),
            vector,
            score,
            is_outlier,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppReport {
    pub name: String,
    pub path: String,
    /// Populated when the app could not be analyzed at all; such apps have
    /// no triggers and count into `apps_failed`.
    pub error: Option<String>,
    pub timed_out: bool,
    pub triggers: Vec<TriggerRecord>,
    pub timings_ms: Timings,
}

impl AppReport {
    pub fn failed(name: &str, path: &str, error: String) -> Self {
        Self {
            name: name.to_string(),
            path: path.to_string(),
            error: Some(error),
            timed_out: false,
            triggers: Vec::new(),
            timings_ms: Timings::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub apps_total: usize,
    pub apps_failed: usize,
    /// Apps with at least one flagged trigger.
    pub apps_with_shso: usize,
    pub triggers_total: usize,
    pub shso_total: usize,
    pub shso_per_app: f64,
    /// 1 − flagged/total: how much of the trigger space a reviewer can
    /// skip. Zero when there are no triggers at all.
    pub search_space_reduction: f64,
    /// Flagged triggers per provenance family.
    pub shso_types: BTreeMap<String, usize>,
    pub timings_ms: Timings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub summary: Summary,
    pub apps: Vec<AppReport>,
}

impl Report {
    /// Builds a report: apps are sorted by path and the summary derived.
    pub fn new(apps: Vec<AppReport>) -> Self {
        let mut r = Report { schema: SCHEMA_VERSION, summary: Summary::default(), apps };
        r.recompute_summary();
        r
    }

    /// Re-sorts apps and rederives the summary from them. Idempotent.
    pub fn recompute_summary(&mut self) {
        self.apps.sort_by(|a, b| a.path.cmp(&b.path));
        let apps = &self.apps;
        let mut s = Summary {
            apps_total: apps.len(),
            ..Summary::default()
        };
        for app in apps {
            if app.error.is_some() {
                s.apps_failed += 1;
            }
            s.triggers_total += app.triggers.len();
            let mut flagged_here = false;
            for t in &app.triggers {
                if t.is_outlier {
                    s.shso_total += 1;
                    flagged_here = true;
                    *s.shso_types.entry(t.trigger_type.clone()).or_insert(0) += 1;
                }
            }
            if flagged_here {
                s.apps_with_shso += 1;
            }
            s.timings_ms.add(&app.timings_ms);
        }
        s.shso_per_app = if apps.is_empty() {
            0.0
        } else {
            s.shso_total as f64 / apps.len() as f64
        };
        s.search_space_reduction = if s.triggers_total == 0 {
            0.0
        } else {
            1.0 - s.shso_total as f64 / s.triggers_total as f64
        };
        self.summary = s;
    }

    /// Strips wall-clock noise so reports become reproducible byte for
    /// byte across runs.
    pub fn zero_timings(&mut self) {
        for app in &mut self.apps {
            app.timings_ms = Timings::default();
        }
        self.summary.timings_ms = Timings::default();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }
}
