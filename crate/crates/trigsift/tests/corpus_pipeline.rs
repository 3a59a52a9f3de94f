//! End-to-end agreement between the generator's ground truth, the static
//! pipeline, and the concrete-execution oracle.

use std::collections::BTreeSet;

use trigsift::catalog::Catalog;
use trigsift::corpus::interp::{enumerate_bindings, interpret};
use trigsift::corpus::{generate, CorpusSpec, GeneratedApp};
use trigsift::pipeline::{analyze_source, AnalysisOptions, AppAnalysis};
use trigsift::tir::emit_program;

fn spec(seed: u64, apps: usize, bomb_rate: f64) -> CorpusSpec {
    CorpusSpec { seed, apps, bomb_rate, ..CorpusSpec::default() }
}

fn analyze(app: &GeneratedApp, cat: &Catalog) -> AppAnalysis {
    let text = emit_program(&app.program);
    analyze_source(&app.name, &text, cat, &AnalysisOptions::default())
        .unwrap_or_else(|e| panic!("{}: analysis failed: {e}", app.name))
}

/// (method, label) pairs a result set can be compared on.
fn sites_of(analysis: &AppAnalysis) -> BTreeSet<(String, String)> {
    analysis
        .triggers
        .iter()
        .map(|t| (t.trigger.method.to_string(), t.trigger.label.clone()))
        .collect()
}

#[test]
fn truth_matches_the_static_analysis_trigger_for_trigger() {
    let cat = Catalog::default_catalog();
    let corpus = generate(&spec(101, 60, 0.3)).unwrap();
    for app in &corpus.apps {
        let analysis = analyze(app, &cat);
        assert!(!analysis.timed_out, "{}", app.name);

        let expected: BTreeSet<(String, String)> = app
            .truth
            .triggers
            .iter()
            .map(|t| (t.method.clone(), t.label.clone()))
            .collect();
        assert_eq!(sites_of(&analysis), expected, "{}: trigger sites drifted", app.name);

        for truth in &app.truth.triggers {
            let found = analysis
                .triggers
                .iter()
                .find(|t| {
                    t.trigger.method.to_string() == truth.method && t.trigger.label == truth.label
                })
                .unwrap();
            assert_eq!(
                found.vector, truth.vector,
                "{}: vector mismatch at {} ({})",
                app.name, truth.label, truth.template
            );
            assert_eq!(
                found.trigger.trigger_type, truth.trigger_type,
                "{}: type mismatch at {}",
                app.name, truth.label
            );
        }
    }
}

#[test]
fn concrete_runs_agree_with_static_taint_on_loop_free_apps() {
    let cat = Catalog::default_catalog();
    let mut s = spec(202, 40, 0.25);
    s.benign_weights.retry_loop = 0.0;
    let corpus = generate(&s).unwrap();

    for app in &corpus.apps {
        assert!(!app.truth.has_loops, "{}", app.name);
        let analysis = analyze(app, &cat);
        let static_sites = sites_of(&analysis);

        let mut dynamic_sites: BTreeSet<(String, String)> = BTreeSet::new();
        let bindings = enumerate_bindings(&app.truth.input_domains);
        assert!(!bindings.is_empty());
        for binding in &bindings {
            let run = interpret(&app.program, binding, &cat)
                .unwrap_or_else(|e| panic!("{}: interpreter failed: {e}", app.name));
            dynamic_sites.extend(
                run.tagged_conditions
                    .iter()
                    .map(|(m, l)| (m.to_string(), l.clone())),
            );
        }

        // Soundness: everything observed dynamically is found statically.
        // For these templates the analysis is also exact, so the sets match.
        assert_eq!(
            dynamic_sites, static_sites,
            "{}: static and dynamic trigger sites disagree",
            app.name
        );
    }
}

#[test]
fn instrumentation_does_not_change_observable_behavior() {
    let cat = Catalog::default_catalog();
    let corpus = generate(&spec(303, 12, 0.5)).unwrap();
    for app in corpus.apps.iter().filter(|a| !a.truth.has_loops) {
        let analysis = analyze(app, &cat);
        for binding in enumerate_bindings(&app.truth.input_domains) {
            let plain = interpret(&app.program, &binding, &cat).unwrap();
            let probed = interpret(&analysis.instrumented, &binding, &cat).unwrap();
            assert_eq!(
                plain.tagged_conditions, probed.tagged_conditions,
                "{}: probes changed which conditions are tagged",
                app.name
            );
        }
    }
}

#[test]
fn analysis_is_deterministic_per_app() {
    let cat = Catalog::default_catalog();
    let corpus = generate(&spec(404, 6, 0.5)).unwrap();
    for app in &corpus.apps {
        let a = analyze(app, &cat);
        let b = analyze(app, &cat);
        assert_eq!(sites_of(&a), sites_of(&b));
        for (x, y) in a.triggers.iter().zip(&b.triggers) {
            assert_eq!(x.vector, y.vector);
            assert_eq!(x.trigger.sources, y.trigger.sources);
        }
    }
}

#[test]
fn vector_invariants_hold_across_a_corpus() {
    let cat = Catalog::default_catalog();
    let corpus = generate(&spec(505, 50, 0.2)).unwrap();
    let mut seen = 0usize;
    for app in &corpus.apps {
        let analysis = analyze(app, &cat);
        for t in &analysis.triggers {
            let v = &t.vector;
            seen += 1;
            assert!(v.s1 <= v.s, "{}: exclusive count exceeded total", app.name);
            assert!((0.0..=1.0).contains(&v.j), "{}: J out of range", app.name);
            for flag in [v.n, v.d, v.r, v.b, v.p] {
                assert!(flag <= 1, "{}: flag not boolean", app.name);
            }
        }
    }
    assert!(seen > 100, "corpus produced too few triggers to be meaningful: {seen}");
}

#[test]
fn branch_divergence_separates_payloads_from_benign_guards() {
    let corpus = generate(&spec(606, 60, 0.3)).unwrap();
    for app in &corpus.apps {
        for t in &app.truth.triggers {
            if t.is_bomb {
                assert_eq!(t.vector.j, 1.0, "{}: payload with symmetric branches", app.name);
            } else {
                assert_eq!(t.vector.j, 0.0, "{}: benign guard with divergent branches", app.name);
            }
        }
    }
}
