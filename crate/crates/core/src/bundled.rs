//! The bundled example models, their expected-verdict manifests, and the
//! regression suite that replays every (model, spec) pair against them.
//!
//! `htlc-reversed` is the timeout-ordering experiment: it is the `htlc`
//! model with the two timeout constants in `init_cond` swapped, nothing
//! else. Its manifest was produced by running the checker and
//! cross-validating with the bounded differential checker on a
//! time-shrunken variant, not by hand.

use crate::checker::{check, CheckOptions, Outcome, Verdict};
use crate::compile::{compile, normalize_ws, CompiledModel};
use crate::error::CheckError;
use crate::graph::{build_graph, BuildOptions, StateGraph};
use crate::parser::parse_model;
use serde::{Deserialize, Serialize};

pub const ESCROW_SOURCE: &str = include_str!("../../../examples/escrow.swapmc");
pub const HTLC_SOURCE: &str = include_str!("../../../examples/htlc.swapmc");
pub const HTLC_REVERSED_SOURCE: &str = include_str!("../../../examples/htlc-reversed.swapmc");

pub const ESCROW_MANIFEST: &str = include_str!("../../../examples/escrow.expected.json");
pub const HTLC_MANIFEST: &str = include_str!("../../../examples/htlc.expected.json");
pub const HTLC_REVERSED_MANIFEST: &str =
    include_str!("../../../examples/htlc-reversed.expected.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundledModel {
    pub id: &'static str,
    pub source: &'static str,
    pub manifest: &'static str,
}

pub const BUNDLED: [BundledModel; 3] = [
    BundledModel {
        id: "escrow",
        source: ESCROW_SOURCE,
        manifest: ESCROW_MANIFEST,
    },
    BundledModel {
        id: "htlc",
        source: HTLC_SOURCE,
        manifest: HTLC_MANIFEST,
    },
    BundledModel {
        id: "htlc-reversed",
        source: HTLC_REVERSED_SOURCE,
        manifest: HTLC_REVERSED_MANIFEST,
    },
];

pub fn bundled(id: &str) -> Option<&'static BundledModel> {
    BUNDLED.iter().find(|b| b.id == id)
}

/// Expected-verdict manifest, stored as JSON next to each model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub model: String,
    pub specs: Vec<ManifestSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestSpec {
    pub label: String,
    pub expected: String,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Manifest, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Swap the two timeout constants in the htlc init_cond; applied to the
/// `htlc` source this produces the `htlc-reversed` model.
pub fn swap_timeouts(src: &str) -> String {
    src.replace(
        "timeoutA == 8 /\\ timeoutB == 6",
        "timeoutA == 6 /\\ timeoutB == 8",
    )
}

/// A time-shrunken variant of a bundled htlc source for the bounded
/// differential checker, which requires a small reachable graph: the clock
/// domain and timeouts shrink, both strategies are pinned in `init_cond`,
/// and the per-step strategy re-randomization becomes `skip`.
pub fn shrink_htlc(
    src: &str,
    time_hi: i64,
    timeout_a: i64,
    timeout_b: i64,
    strategy_a: &str,
    strategy_b: &str,
) -> String {
    let src = src.replace(
        "type Time = {0..20}",
        &format!("type Time = {{0..{time_hi}}}"),
    );
    let old_timeouts = if src.contains("timeoutA == 8") {
        "timeoutA == 8 /\\ timeoutB == 6"
    } else {
        "timeoutA == 6 /\\ timeoutB == 8"
    };
    let src = src.replace(
        old_timeouts,
        &format!(
            "timeoutA == {timeout_a} /\\ timeoutB == {timeout_b} /\\ \
             strategyA == {strategy_a} /\\ strategyB == {strategy_b}"
        ),
    );
    src.replace("[[ strategyA,strategyB | True ]]  ;", "skip ;")
}

#[derive(Debug, Clone)]
pub struct RegressionEntry {
    pub model: String,
    pub label: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RegressionReport {
    pub entries: Vec<RegressionEntry>,
}

impl RegressionReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn mismatches(&self) -> Vec<&RegressionEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }
}

/// Load and check a bundled model once.
pub fn load_bundled(b: &BundledModel) -> (CompiledModel, StateGraph) {
    let ir = parse_model(b.source)
        .unwrap_or_else(|e| panic!("bundled model {} must parse: {e:?}", b.id));
    let m = compile(&ir).unwrap_or_else(|e| panic!("bundled model {} must validate: {e}", b.id));
    let g = build_graph(&m, BuildOptions::default())
        .unwrap_or_else(|e| panic!("bundled model {} must explore: {e}", b.id));
    (m, g)
}

/// Run every (bundled model, spec) pair and compare against the manifests.
pub fn regression_suite() -> Result<RegressionReport, CheckError> {
    let mut report = RegressionReport::default();
    for b in &BUNDLED {
        let manifest = Manifest::parse(b.manifest)
            .unwrap_or_else(|e| panic!("manifest for {} must parse: {e}", b.id));
        let (m, g) = load_bundled(b);
        assert_eq!(
            manifest.specs.len(),
            m.specs.len(),
            "manifest for {} must cover every spec",
            b.id
        );
        for entry in &manifest.specs {
            let idx = m.spec_by_label(&entry.label).unwrap_or_else(|| {
                panic!("manifest label {:?} not found in {}", entry.label, b.id)
            });
            let verdict: Verdict = check(&m, &g, idx, CheckOptions::default())?;
            // Vacuous still means the specification holds.
            let actual = match verdict.outcome {
                Outcome::Holds | Outcome::Vacuous => "holds",
                Outcome::Refuted(_) => "refuted",
            };
            report.entries.push(RegressionEntry {
                model: b.id.to_string(),
                label: normalize_ws(&entry.label),
                expected: entry.expected.clone(),
                actual: actual.to_string(),
                pass: actual == entry.expected,
            });
        }
    }
    Ok(report)
}
