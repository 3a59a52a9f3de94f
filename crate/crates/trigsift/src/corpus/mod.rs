//! Synthetic app generator with ground truth.
//!
//! Produces programs assembled from a small library of block templates:
//! benign guard patterns (connectivity null-checks, UI-state gates,
//! config-driven views, bounded retries) and hidden-payload patterns
//! (emulator evasion, country gating, screen-triggered adware, device
//! theft, time bombs). Every generated conditional comes with a truth
//! record — its label, provenance family, whether it hides a payload, and
//! the feature vector the analysis is expected to compute — so the whole
//! pipeline can be validated end to end on corpora of arbitrary size.
//!
//! Generation is deterministic: the same [`CorpusSpec`] always yields the
//! same programs, byte for byte.

pub mod interp;
mod templates;

use std::collections::{BTreeMap, VecDeque};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::tir::{Class, Instr, Method, MethodSig, Program, Stmt};
use interp::Value;
use templates::{benign_block, bomb_block, GenCtx, RelInstr, SENSITIVE_POOL};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
}

/// Relative weights for the benign block families.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenignWeights {
    pub null_check: f64,
    pub ui_state: f64,
    pub config: f64,
    pub retry_loop: f64,
}

impl Default for BenignWeights {
    fn default() -> Self {
        Self { null_check: 3.0, ui_state: 2.0, config: 3.0, retry_loop: 1.0 }
    }
}

impl BenignWeights {
    fn as_array(&self) -> [f64; 4] {
        [self.null_check, self.ui_state, self.config, self.retry_loop]
    }
}

/// Relative weights for the payload block templates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BombWeights {
    pub emulator_exfil: f64,
    pub country_sms: f64,
    pub screen_adware: f64,
    pub device_stealer: f64,
    pub time_bomb: f64,
}

impl Default for BombWeights {
    fn default() -> Self {
        Self {
            emulator_exfil: 1.0,
            country_sms: 1.0,
            screen_adware: 1.0,
            device_stealer: 1.0,
            time_bomb: 1.0,
        }
    }
}

impl BombWeights {
    fn as_array(&self) -> [f64; 5] {
        [
            self.emulator_exfil,
            self.country_sms,
            self.screen_adware,
            self.device_stealer,
            self.time_bomb,
        ]
    }
}

/// Everything that determines a corpus. Serializable so a generation run
/// can be described by a single JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub apps: usize,
    /// Fraction of apps that receive exactly one payload block.
    pub bomb_rate: f64,
    pub benign_weights: BenignWeights,
    pub bomb_weights: BombWeights,
    /// Benign blocks per app, drawn uniformly from `blocks_min..=blocks_max`.
    pub blocks_min: usize,
    pub blocks_max: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            apps: 100,
            bomb_rate: 0.0,
            benign_weights: BenignWeights::default(),
            bomb_weights: BombWeights::default(),
            blocks_min: 3,
            blocks_max: 7,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidSpec(m.to_string()));
        if self.apps == 0 {
            return bad("apps must be at least 1");
        }
        if !self.bomb_rate.is_finite() || !(0.0..=1.0).contains(&self.bomb_rate) {
            return bad("bomb_rate must lie in [0, 1]");
        }
        let bw = self.benign_weights.as_array();
        let pw = self.bomb_weights.as_array();
        if bw.iter().chain(pw.iter()).any(|w| !w.is_finite() || *w < 0.0) {
            return bad("weights must be finite and non-negative");
        }
        if bw.iter().sum::<f64>() <= 0.0 {
            return bad("benign weights must not all be zero");
        }
        if self.bomb_rate > 0.0 && pw.iter().sum::<f64>() <= 0.0 {
            return bad("bomb weights must not all be zero when bomb_rate > 0");
        }
        if self.blocks_min == 0 || self.blocks_min > self.blocks_max {
            return bad("block counts must satisfy 1 <= blocks_min <= blocks_max");
        }
        Ok(())
    }
}

/// Truth record for one generated conditional.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TriggerTruth {
    /// Signature of the containing method, e.g. `App.main/0`.
    pub method: String,
    pub label: String,
    pub is_bomb: bool,
    pub template: String,
    pub trigger_type: String,
    pub vector: FeatureVector,
}

/// Truth record for one generated app.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppTruth {
    pub name: String,
    pub bomb_template: Option<String>,
    /// Whether any block contains a back edge. Input-enumeration oracles
    /// only terminate trivially on loop-free apps, so they key off this.
    pub has_loops: bool,
    /// Finite value domains for every external source the app consults,
    /// keyed by signature (`Tel.getDeviceId`) or field (`Build.MODEL`).
    pub input_domains: BTreeMap<String, Vec<Value>>,
    pub triggers: Vec<TriggerTruth>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub apps: Vec<AppTruth>,
}

#[derive(Debug, Clone)]
pub struct GeneratedApp {
    pub name: String,
    pub program: Program,
    pub truth: AppTruth,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub apps: Vec<GeneratedApp>,
    seed: u64,
}

impl Corpus {
    pub fn truth(&self) -> GroundTruth {
        GroundTruth {
            seed: self.seed,
            apps: self.apps.iter().map(|a| a.truth.clone()).collect(),
        }
    }
}

/// Generates a corpus. Deterministic in the spec, including the seed.
pub fn generate(spec: &CorpusSpec) -> Result<Corpus, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let bomb_count = (spec.apps as f64 * spec.bomb_rate).round() as usize;
    let mut bomb_apps = rand::seq::index::sample(&mut rng, spec.apps, bomb_count).into_vec();
    bomb_apps.sort_unstable();
    let mut bomb_apps = bomb_apps.into_iter().peekable();

    let benign_dist = WeightedIndex::new(spec.benign_weights.as_array())
        .map_err(|e| GenError::InvalidSpec(e.to_string()))?;
    let bomb_dist = if spec.bomb_rate > 0.0 {
        Some(
            WeightedIndex::new(spec.bomb_weights.as_array())
                .map_err(|e| GenError::InvalidSpec(e.to_string()))?,
        )
    } else {
        None
    };

    let mut apps = Vec::with_capacity(spec.apps);
    for i in 0..spec.apps {
        let with_bomb = bomb_apps.peek() == Some(&i);
        if with_bomb {
            bomb_apps.next();
        }
        apps.push(generate_app(i, with_bomb, spec, &benign_dist, bomb_dist.as_ref(), &mut rng));
    }
    Ok(Corpus { apps, seed: spec.seed })
}

fn generate_app(
    index: usize,
    with_bomb: bool,
    spec: &CorpusSpec,
    benign_dist: &WeightedIndex<f64>,
    bomb_dist: Option<&WeightedIndex<f64>>,
    rng: &mut ChaCha8Rng,
) -> GeneratedApp {
    let name = format!("app_{index:04}");
    let n_benign = rng.random_range(spec.blocks_min..=spec.blocks_max);
    let bomb_pos = if with_bomb { Some(rng.random_range(0..=n_benign)) } else { None };

    let mut helpers: Vec<Method> = Vec::new();
    let mut helper_ctr = 0usize;
    let mut pool_vec = SENSITIVE_POOL.to_vec();
    pool_vec.shuffle(rng);
    let mut pool: VecDeque<(&'static str, &'static str)> = pool_vec.into_iter().collect();
    let mut domains: BTreeMap<String, Vec<Value>> = BTreeMap::new();

    let mut plans = Vec::with_capacity(n_benign + usize::from(with_bomb));
    for b in 0..=n_benign {
        if bomb_pos == Some(b) {
            let mut ctx = GenCtx {
                rng,
                helpers: &mut helpers,
                helper_ctr: &mut helper_ctr,
                pool: &mut pool,
                domains: &mut domains,
            };
            let template = bomb_dist.expect("bomb weights present").sample(ctx.rng);
            plans.push(bomb_block(template, plans.len(), &mut ctx));
        }
        if b == n_benign {
            break;
        }
        let family = benign_dist.sample(rng);
        let mut ctx = GenCtx {
            rng,
            helpers: &mut helpers,
            helper_ctr: &mut helper_ctr,
            pool: &mut pool,
            domains: &mut domains,
        };
        plans.push(benign_block(family, plans.len(), &mut ctx));
    }

    // Lay the blocks out into one entry method with absolute labels. A
    // relative target one past a block's end resolves to the next block's
    // first statement, or to the trailing `return` after the last block.
    let mut body: Vec<Stmt> = Vec::new();
    let mut base = 0usize;
    let mut truth_triggers = Vec::new();
    let main_sig = MethodSig {
        class: "App".to_string(),
        name: "main".to_string(),
        arity: 0,
    };
    for plan in &plans {
        for (k, ri) in plan.instrs.iter().enumerate() {
            let label = format!("l{}", base + k);
            let instr = match ri {
                RelInstr::Plain(i) => i.clone(),
                RelInstr::If { var, op, rhs, rel } => Instr::If {
                    var: var.clone(),
                    op: *op,
                    rhs: rhs.clone(),
                    target: format!("l{}", base + rel),
                },
                RelInstr::Goto { rel } => Instr::Goto { target: format!("l{}", base + rel) },
            };
            body.push(Stmt { label, instr });
        }
        truth_triggers.push(TriggerTruth {
            method: main_sig.to_string(),
            label: format!("l{}", base + plan.rel_if),
            is_bomb: plan.is_bomb,
            template: plan.template.to_string(),
            trigger_type: plan.trigger_type.to_string(),
            vector: plan.vector,
        });
        base += plan.instrs.len();
    }
    body.push(Stmt { label: format!("l{base}"), instr: Instr::Return { value: None } });

    let main = Method {
        name: "main".to_string(),
        params: Vec::new(),
        is_entry: true,
        body,
    };
    let mut methods = vec![main];
    methods.append(&mut helpers);
    let program = Program {
        classes: vec![Class { name: "App".to_string(), methods }],
    };

    let truth = AppTruth {
        name: name.clone(),
        bomb_template: plans
            .iter()
            .find(|p| p.is_bomb)
            .map(|p| p.template.to_string()),
        has_loops: plans.iter().any(|p| p.has_loop),
        input_domains: domains,
        triggers: truth_triggers,
    };
    GeneratedApp { name, program, truth }
}
