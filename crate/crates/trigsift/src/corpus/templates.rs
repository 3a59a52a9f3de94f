//! The building blocks of generated apps.
//!
//! A block is a short straight-line prologue plus one guarded diamond; the
//! generator strings blocks together into `main` and appends their helper
//! methods to the class. Jump targets inside a block are relative statement
//! offsets (an offset one past the block's end lands on the join — the next
//! block's first statement or the final `return`), which keeps every block
//! position-independent.
//!
//! Each block also declares its ground truth: where the trigger sits, what
//! the taint provenance family will be, and the exact feature vector the
//! pipeline is expected to compute. Those frozen vectors are what the
//! anomaly detector's training geometry rests on, so any change here must
//! be mirrored in tests that pin archetype vectors.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::interp::Value;
use crate::features::FeatureVector;
use crate::tir::{BinOp, CallExpr, Const, Instr, Method, Operand, RelOp, Rhs, Stmt};

/// Sensitive signatures benign apps may legitimately guard. Kept disjoint
/// from every bomb payload signature so exclusivity features (S₁) keep
/// their designed values when blocks are mixed within one app.
pub(super) const SENSITIVE_POOL: [(&str, &str); 8] = [
    ("Gps", "getLastKnownLocation"),
    ("Net", "openConnection"),
    ("Net", "download"),
    ("Db", "query"),
    ("Io", "readFile"),
    ("Crypto", "encrypt"),
    ("Clip", "read"),
    ("Cal", "readEvents"),
];

/// Finite domain the oracle enumerates for a source signature (or source
/// field). Both values of every condition source make the comparison go
/// each way, so both branches of every generated trigger are exercised.
pub(super) fn domain_of(sig: &str) -> Vec<Value> {
    let ints = |a: i64, b: i64| vec![Value::Int(a), Value::Int(b)];
    let strs = |a: &str, b: &str| vec![Value::Str(a.into()), Value::Str(b.into())];
    match sig {
        "Conn.getActiveNetworkInfo" | "Wifi.isWifiEnabled" | "Power.isScreenOn"
        | "Audio.isMusicActive" => ints(0, 1),
        "Net.getResponseCode" => ints(200, 500),
        "Db.getCount" => ints(0, 5),
        "Cam.getCameraIdList" => ints(0, 2),
        "Sys.currentTimeMillis" => ints(1_600_000_000, 1_800_000_000),
        "Db.getString" => strs("on", "off"),
        "Sys.getProperty" => strs("on", "x"),
        "Net.getResponseMessage" => strs("on", "err"),
        "Tel.getNetworkCountryIso" => strs("us", "de"),
        "Tel.getSimCountryIso" => strs("us", "fr"),
        "Tel.getDeviceId" => strs("000000000000000", "867530912345678"),
        "Build.FINGERPRINT" => strs("generic", "pixel-fp"),
        "Build.MODEL" => strs("sdk", "Pixel 7"),
        "Build.HARDWARE" => strs("goldfish", "tensor"),
        "Build.BRAND" => strs("generic", "google"),
        "Build.PRODUCT" => strs("sdk", "husky"),
        other => panic!("no input domain defined for {other}"),
    }
}

/// (source signature, comparison constant, provenance family).
const NULL_CHECK_CONDS: [(&str, i64, &str); 4] = [
    ("Conn.getActiveNetworkInfo", 0, "Connectivity"),
    ("Wifi.isWifiEnabled", 0, "Wi-Fi"),
    ("Net.getResponseCode", 200, "Internet"),
    ("Db.getCount", 0, "Database"),
];
const UI_STATE_CONDS: [(&str, i64, &str); 3] = [
    ("Power.isScreenOn", 1, "Power"),
    ("Audio.isMusicActive", 1, "Audio"),
    ("Cam.getCameraIdList", 0, "Camera"),
];
const CONFIG_CONDS: [(&str, &str, &str); 3] = [
    ("Db.getString", "on", "Database"),
    ("Sys.getProperty", "on", "System"),
    ("Net.getResponseMessage", "on", "Internet"),
];
/// Emulator fingerprints for the Build-field check, rotated per bomb.
const EMULATOR_FIELDS: [(&str, &str); 5] = [
    ("FINGERPRINT", "generic"),
    ("MODEL", "sdk"),
    ("HARDWARE", "goldfish"),
    ("BRAND", "generic"),
    ("PRODUCT", "sdk"),
];

/// An instruction whose jump target (if any) is a statement offset relative
/// to the enclosing block.
pub(super) enum RelInstr {
    Plain(Instr),
    If { var: String, op: RelOp, rhs: Operand, rel: usize },
    Goto { rel: usize },
}

pub(super) struct BlockPlan {
    pub instrs: Vec<RelInstr>,
    /// Offset of the taint-hit conditional within `instrs`.
    pub rel_if: usize,
    pub template: &'static str,
    pub trigger_type: &'static str,
    pub vector: FeatureVector,
    pub is_bomb: bool,
    pub has_loop: bool,
}

pub(super) struct GenCtx<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub helpers: &'a mut Vec<Method>,
    pub helper_ctr: &'a mut usize,
    pub pool: &'a mut VecDeque<(&'static str, &'static str)>,
    pub domains: &'a mut BTreeMap<String, Vec<Value>>,
}

impl GenCtx<'_> {
    fn record_domain(&mut self, sig: &str) {
        self.domains.entry(sig.to_string()).or_insert_with(|| domain_of(sig));
    }

    fn fresh_helper(&mut self) -> String {
        let name = format!("h{}", *self.helper_ctr);
        *self.helper_ctr += 1;
        name
    }
}

fn split_sig(sig: &str) -> (&str, &str) {
    sig.split_once('.').expect("well-formed signature")
}

fn call_instr(sig: &str, args: &[&str]) -> Instr {
    let (class, method) = split_sig(sig);
    Instr::Call(CallExpr {
        class: class.to_string(),
        method: method.to_string(),
        args: args.iter().map(|a| a.to_string()).collect(),
    })
}

fn assign_call(dst: &str, sig: &str, args: &[&str]) -> Instr {
    let (class, method) = split_sig(sig);
    Instr::Assign {
        dst: dst.to_string(),
        rhs: Rhs::Call(CallExpr {
            class: class.to_string(),
            method: method.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }),
    }
}

fn vec9(s: u32, n: u8, d: u8, r: u8, b: u8, p: u8, m1: u32, s1: u32, j: f64) -> FeatureVector {
    FeatureVector { s, n, d, r, b, p, m1, s1, j }
}

/// A helper with a void body: `name(params) { calls...; return }`.
fn void_helper(name: &str, params: &[&str], calls: Vec<Instr>) -> Method {
    let mut body: Vec<Stmt> = calls
        .into_iter()
        .enumerate()
        .map(|(i, instr)| Stmt { label: format!("l{i}"), instr })
        .collect();
    body.push(Stmt {
        label: format!("l{}", body.len()),
        instr: Instr::Return { value: None },
    });
    Method {
        name: name.to_string(),
        params: params.iter().map(|p| p.to_string()).collect(),
        is_entry: false,
        body,
    }
}

pub(super) fn benign_block(family: usize, b: usize, ctx: &mut GenCtx) -> BlockPlan {
    match family {
        0 => null_check(b, ctx),
        1 => ui_state(b, ctx),
        2 => config(b, ctx),
        3 => retry_loop(b, ctx),
        _ => unreachable!("benign family index"),
    }
}

/// `x = source(); if x == K goto log; ui-or-log; goto join; log: ...` — the
/// everyday "is the network up / is the cursor empty" guard.
fn null_check(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    let (sig, k, family) = NULL_CHECK_CONDS[ctx.rng.random_range(0..NULL_CHECK_CONDS.len())];
    let log_var = ctx.rng.random_bool(0.4);
    ctx.record_domain(sig);
    let x = format!("x{b}");
    let false_arm = if log_var { call_instr("Log.logValue", &[&x]) } else { call_instr("Ui.showToast", &[]) };
    let instrs = vec![
        RelInstr::Plain(assign_call(&x, sig, &[])),
        RelInstr::If { var: x.clone(), op: RelOp::Eq, rhs: Operand::Const(Const::Int(k)), rel: 4 },
        RelInstr::Plain(false_arm),
        RelInstr::Goto { rel: 5 },
        RelInstr::Plain(call_instr("Log.write", &[])),
    ];
    BlockPlan {
        instrs,
        rel_if: 1,
        template: "null_check",
        trigger_type: family,
        vector: if log_var { vec9(0, 0, 0, 0, 0, 1, 0, 0, 0.0) } else { vec9(0, 0, 0, 0, 0, 0, 0, 0, 0.0) },
        is_bomb: false,
        has_loop: false,
    }
}

/// Device-state check guarding a single-use rendering helper.
fn ui_state(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    let (sig, k, family) = UI_STATE_CONDS[ctx.rng.random_range(0..UI_STATE_CONDS.len())];
    let pass_var = ctx.rng.random_bool(0.45);
    ctx.record_domain(sig);
    let u = format!("u{b}");
    let helper = ctx.fresh_helper();
    let (helper_method, arm) = if pass_var {
        (
            void_helper(&helper, &["v"], vec![call_instr("Ui.render", &["v"])]),
            call_instr(&format!("App.{helper}"), &[&u]),
        )
    } else {
        (
            void_helper(&helper, &[], vec![call_instr("Ui.render", &[])]),
            call_instr(&format!("App.{helper}"), &[]),
        )
    };
    ctx.helpers.push(helper_method);
    let instrs = vec![
        RelInstr::Plain(assign_call(&u, sig, &[])),
        RelInstr::If { var: u, op: RelOp::Eq, rhs: Operand::Const(Const::Int(k)), rel: 3 },
        RelInstr::Goto { rel: 4 },
        RelInstr::Plain(arm),
    ];
    BlockPlan {
        instrs,
        rel_if: 1,
        template: "ui_state",
        trigger_type: family,
        vector: if pass_var { vec9(0, 0, 0, 0, 0, 1, 1, 0, 0.0) } else { vec9(0, 0, 0, 0, 0, 0, 1, 0, 0.0) },
        is_bomb: false,
        has_loop: false,
    }
}

/// Config-driven branch with the same sensitive behavior on both sides —
/// the benign pattern that actually exercises S and S₁ without looking like
/// a bomb (J stays 0 because the branches agree).
fn config(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    let (sig, k, family) = CONFIG_CONDS[ctx.rng.random_range(0..CONFIG_CONDS.len())];
    let style = ctx.rng.random_range(0.0..1.0);
    ctx.record_domain(sig);

    // Variant H consumes two pool signatures, the others one. On an empty
    // pool the block degrades to a plain null-check-style guard without
    // sensitive calls; the recorded truth reflects what was generated.
    let needed = if style >= 0.8 { 2 } else { 1 };
    if ctx.pool.len() < needed {
        return config_downgrade(b, sig, k, family, ctx);
    }

    let c = format!("c{b}");

    if style < 0.35 {
        // E: inline, same signature on both branches.
        let (sc, sm) = ctx.pool.pop_front().unwrap();
        let sens = format!("{sc}.{sm}");
        let y = format!("y{b}");
        let z = format!("z{b}");
        let instrs = vec![
            RelInstr::Plain(assign_call(&c, sig, &[])),
            RelInstr::If { var: c, op: RelOp::Eq, rhs: Operand::Const(Const::Str(k.to_string())), rel: 5 },
            RelInstr::Plain(assign_call(&y, &sens, &[])),
            RelInstr::Plain(call_instr("Ui.showList", &[&y])),
            RelInstr::Goto { rel: 7 },
            RelInstr::Plain(assign_call(&z, &sens, &[])),
            RelInstr::Plain(call_instr("Ui.showMap", &[&z])),
        ];
        BlockPlan {
            instrs,
            rel_if: 1,
            template: "config",
            trigger_type: family,
            vector: vec9(1, 0, 0, 0, 0, 0, 0, 1, 0.0),
            is_bomb: false,
            has_loop: false,
        }
    } else if style < 0.6 {
        // F: both branches call dedicated single-use helpers that share one
        // sensitive signature.
        let (sc, sm) = ctx.pool.pop_front().unwrap();
        let sens = format!("{sc}.{sm}");
        let ha = ctx.fresh_helper();
        let hb = ctx.fresh_helper();
        ctx.helpers.push(void_helper(
            &ha,
            &[],
            vec![assign_call("y", &sens, &[]), call_instr("Ui.showList", &["y"])],
        ));
        ctx.helpers.push(void_helper(
            &hb,
            &[],
            vec![assign_call("y", &sens, &[]), call_instr("Ui.showMap", &["y"])],
        ));
        let instrs = vec![
            RelInstr::Plain(assign_call(&c, sig, &[])),
            RelInstr::If { var: c, op: RelOp::Eq, rhs: Operand::Const(Const::Str(k.to_string())), rel: 4 },
            RelInstr::Plain(call_instr(&format!("App.{ha}"), &[])),
            RelInstr::Goto { rel: 5 },
            RelInstr::Plain(call_instr(&format!("App.{hb}"), &[])),
        ];
        BlockPlan {
            instrs,
            rel_if: 1,
            template: "config",
            trigger_type: family,
            vector: vec9(1, 0, 0, 0, 0, 0, 2, 1, 0.0),
            is_bomb: false,
            has_loop: false,
        }
    } else if style < 0.8 {
        // G: like E, but the join-side view reads the condition variable.
        let (sc, sm) = ctx.pool.pop_front().unwrap();
        let sens = format!("{sc}.{sm}");
        let y = format!("y{b}");
        let z = format!("z{b}");
        let instrs = vec![
            RelInstr::Plain(assign_call(&c, sig, &[])),
            RelInstr::If { var: c.clone(), op: RelOp::Eq, rhs: Operand::Const(Const::Str(k.to_string())), rel: 5 },
            RelInstr::Plain(assign_call(&y, &sens, &[])),
            RelInstr::Plain(call_instr("Ui.showList", &[&y])),
            RelInstr::Goto { rel: 7 },
            RelInstr::Plain(assign_call(&z, &sens, &[])),
            RelInstr::Plain(call_instr("Ui.showBoth", &[&z, &c])),
        ];
        BlockPlan {
            instrs,
            rel_if: 1,
            template: "config",
            trigger_type: family,
            vector: vec9(1, 0, 0, 0, 0, 1, 0, 1, 0.0),
            is_bomb: false,
            has_loop: false,
        }
    } else {
        // H: two signatures, both on each branch.
        let (ac, am) = ctx.pool.pop_front().unwrap();
        let (bc, bm) = ctx.pool.pop_front().unwrap();
        let sens_a = format!("{ac}.{am}");
        let sens_b = format!("{bc}.{bm}");
        let y1 = format!("y{b}a");
        let y2 = format!("y{b}b");
        let z1 = format!("z{b}a");
        let z2 = format!("z{b}b");
        let instrs = vec![
            RelInstr::Plain(assign_call(&c, sig, &[])),
            RelInstr::If { var: c, op: RelOp::Eq, rhs: Operand::Const(Const::Str(k.to_string())), rel: 6 },
            RelInstr::Plain(assign_call(&y1, &sens_a, &[])),
            RelInstr::Plain(assign_call(&y2, &sens_b, &[])),
            RelInstr::Plain(call_instr("Ui.showList", &[&y1])),
            RelInstr::Goto { rel: 9 },
            RelInstr::Plain(assign_call(&z1, &sens_a, &[])),
            RelInstr::Plain(assign_call(&z2, &sens_b, &[])),
            RelInstr::Plain(call_instr("Ui.showMap", &[&z2])),
        ];
        BlockPlan {
            instrs,
            rel_if: 1,
            template: "config",
            trigger_type: family,
            vector: vec9(2, 0, 0, 0, 0, 0, 0, 2, 0.0),
            is_bomb: false,
            has_loop: false,
        }
    }
}

/// Pool-exhausted config block: same condition, no sensitive calls.
fn config_downgrade(
    b: usize,
    sig: &str,
    k: &str,
    family: &'static str,
    _ctx: &mut GenCtx,
) -> BlockPlan {
    let c = format!("c{b}");
    let instrs = vec![
        RelInstr::Plain(assign_call(&c, sig, &[])),
        RelInstr::If { var: c, op: RelOp::Eq, rhs: Operand::Const(Const::Str(k.to_string())), rel: 4 },
        RelInstr::Plain(call_instr("Ui.showToast", &[])),
        RelInstr::Goto { rel: 5 },
        RelInstr::Plain(call_instr("Log.write", &[])),
    ];
    BlockPlan {
        instrs,
        rel_if: 1,
        template: "config",
        trigger_type: family,
        vector: vec9(0, 0, 0, 0, 0, 0, 0, 0, 0.0),
        is_bomb: false,
        has_loop: false,
    }
}

/// Bounded retry: poll a response code up to three times. The only loop the
/// generator emits; apps containing it are marked so oracle enumeration can
/// skip them.
fn retry_loop(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    ctx.record_domain("Net.getResponseCode");
    let n = format!("n{b}");
    let r = format!("r{b}");
    let instrs = vec![
        RelInstr::Plain(Instr::Assign { dst: n.clone(), rhs: Rhs::Const(Const::Int(0)) }),
        RelInstr::Plain(assign_call(&r, "Net.getResponseCode", &[])),
        RelInstr::If { var: r, op: RelOp::Eq, rhs: Operand::Const(Const::Int(200)), rel: 6 },
        RelInstr::Plain(Instr::Assign {
            dst: n.clone(),
            rhs: Rhs::Bin { lhs: n.clone(), op: BinOp::Add, rhs: Operand::Const(Const::Int(1)) },
        }),
        RelInstr::If { var: n, op: RelOp::Lt, rhs: Operand::Const(Const::Int(3)), rel: 1 },
        RelInstr::Goto { rel: 7 },
        RelInstr::Plain(call_instr("Ui.showPage", &[])),
    ];
    BlockPlan {
        instrs,
        rel_if: 2,
        template: "retry_loop",
        trigger_type: "Internet",
        vector: vec9(0, 0, 0, 0, 0, 0, 0, 0, 0.0),
        is_bomb: false,
        has_loop: true,
    }
}

pub(super) fn bomb_block(template: usize, b: usize, ctx: &mut GenCtx) -> BlockPlan {
    match template {
        0 => emulator_exfil(b, ctx),
        1 => country_sms(b, ctx),
        2 => screen_adware(b, ctx),
        3 => device_stealer(b, ctx),
        4 => time_bomb(b, ctx),
        _ => unreachable!("bomb template index"),
    }
}

/// Emulator fingerprint check hiding an identifier-exfiltration payload on
/// the real-device path.
fn emulator_exfil(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    let (field, emu) = EMULATOR_FIELDS[ctx.rng.random_range(0..EMULATOR_FIELDS.len())];
    ctx.record_domain(&format!("Build.{field}"));
    let f = format!("f{b}");
    ctx.helpers.push(void_helper(
        "pay",
        &[],
        vec![
            assign_call("d", "Tel.getDeviceId", &[]),
            assign_call("gl", "Gps.getLongitude", &[]),
            call_instr("Net.post", &["d"]),
            call_instr("Net.post", &["gl"]),
            call_instr("Svc.start", &[]),
        ],
    ));
    let instrs = vec![
        RelInstr::Plain(Instr::Assign {
            dst: f.clone(),
            rhs: Rhs::FieldLoad { class: "Build".to_string(), field: field.to_string() },
        }),
        RelInstr::If { var: f, op: RelOp::Eq, rhs: Operand::Const(Const::Str(emu.to_string())), rel: 4 },
        RelInstr::Plain(call_instr("App.pay", &[])),
        RelInstr::Goto { rel: 5 },
        RelInstr::Plain(call_instr("Sys.exit", &[])),
    ];
    BlockPlan {
        instrs,
        rel_if: 1,
        template: "emulator_exfil",
        trigger_type: "Build",
        vector: vec9(3, 0, 0, 0, 1, 0, 1, 3, 1.0),
        is_bomb: true,
        has_loop: false,
    }
}

/// Country-code check gating an SMS payload.
fn country_sms(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    let (sig, family) = if ctx.rng.random_bool(0.5) {
        ("Tel.getNetworkCountryIso", "Telephony")
    } else {
        ("Tel.getSimCountryIso", "Telephony")
    };
    ctx.record_domain(sig);
    let cc = format!("cc{b}");
    ctx.helpers.push(void_helper(
        "pay",
        &[],
        vec![
            assign_call("p", "Tel.getLine1Number", &[]),
            call_instr("Sms.send", &["p"]),
            call_instr("Sms.sendData", &["p"]),
            call_instr("Svc.start", &[]),
        ],
    ));
    let instrs = vec![
        RelInstr::Plain(assign_call(&cc, sig, &[])),
        RelInstr::If { var: cc, op: RelOp::Eq, rhs: Operand::Const(Const::Str("us".to_string())), rel: 4 },
        RelInstr::Plain(call_instr("App.pay", &[])),
        RelInstr::Goto { rel: 5 },
        RelInstr::Plain(call_instr("Ui.showMessage", &[])),
    ];
    BlockPlan {
        instrs,
        rel_if: 1,
        template: "country_sms",
        trigger_type: family,
        vector: vec9(3, 0, 0, 0, 1, 0, 1, 3, 1.0),
        is_bomb: true,
        has_loop: false,
    }
}

/// Ad bombardment once the screen turns on.
fn screen_adware(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    ctx.record_domain("Power.isScreenOn");
    let sc = format!("sc{b}");
    ctx.helpers.push(void_helper(
        "pay",
        &[],
        vec![
            call_instr("Ads.showFullScreen", &[]),
            call_instr("Ads.loadBanner", &[]),
            call_instr("Job.schedule", &[]),
        ],
    ));
    let instrs = vec![
        RelInstr::Plain(assign_call(&sc, "Power.isScreenOn", &[])),
        RelInstr::If { var: sc, op: RelOp::Eq, rhs: Operand::Const(Const::Int(1)), rel: 3 },
        RelInstr::Goto { rel: 4 },
        RelInstr::Plain(call_instr("App.pay", &[])),
    ];
    BlockPlan {
        instrs,
        rel_if: 1,
        template: "screen_adware",
        trigger_type: "Power",
        vector: vec9(2, 0, 0, 0, 1, 0, 1, 2, 1.0),
        is_bomb: true,
        has_loop: false,
    }
}

/// Real-device check (non-null device id) guarding location/file theft.
fn device_stealer(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    ctx.record_domain("Tel.getDeviceId");
    let id = format!("id{b}");
    ctx.helpers.push(void_helper(
        "pay",
        &["v"],
        vec![
            assign_call("la", "Gps.getLatitude", &[]),
            call_instr("Io.writeFile", &["la"]),
            call_instr("Io.writeFile", &["v"]),
            call_instr("Net.upload", &["v"]),
            call_instr("Sys.loadNative", &[]),
        ],
    ));
    let instrs = vec![
        RelInstr::Plain(assign_call(&id, "Tel.getDeviceId", &[])),
        RelInstr::If {
            var: id.clone(),
            op: RelOp::Eq,
            rhs: Operand::Const(Const::Str("000000000000000".to_string())),
            rel: 4,
        },
        RelInstr::Plain(call_instr("App.pay", &[&id])),
        RelInstr::Goto { rel: 5 },
        RelInstr::Plain(call_instr("Log.write", &[])),
    ];
    BlockPlan {
        instrs,
        rel_if: 1,
        template: "device_stealer",
        trigger_type: "Telephony",
        vector: vec9(3, 1, 0, 0, 0, 1, 1, 3, 1.0),
        is_bomb: true,
        has_loop: false,
    }
}

/// Dormant until a wall-clock date, then sideloading.
fn time_bomb(b: usize, ctx: &mut GenCtx) -> BlockPlan {
    ctx.record_domain("Sys.currentTimeMillis");
    let t = format!("t{b}");
    ctx.helpers.push(void_helper(
        "pay",
        &[],
        vec![
            call_instr("DexLoader.load", &[]),
            assign_call("x", "Exec.runtimeExec", &[]),
            call_instr("Pkg.installPackage", &["x"]),
            call_instr("Svc.start", &[]),
        ],
    ));
    let instrs = vec![
        RelInstr::Plain(assign_call(&t, "Sys.currentTimeMillis", &[])),
        RelInstr::If {
            var: t,
            op: RelOp::Lt,
            rhs: Operand::Const(Const::Int(1_700_000_000)),
            rel: 4,
        },
        RelInstr::Plain(call_instr("App.pay", &[])),
        RelInstr::Goto { rel: 5 },
        RelInstr::Plain(call_instr("Log.write", &[])),
    ];
    BlockPlan {
        instrs,
        rel_if: 1,
        template: "time_bomb",
        trigger_type: "System",
        vector: vec9(2, 0, 1, 0, 1, 0, 1, 2, 1.0),
        is_bomb: true,
        has_loop: false,
    }
}
