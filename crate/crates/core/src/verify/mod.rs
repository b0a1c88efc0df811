//! Randomized verification: instance generators, reducibility detectors and
//! a seeded suite of executable properties.

mod detectors;
mod generators;
mod properties;

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::io::MatrixFile;
use crate::lattice::Tolerances;

pub use detectors::{
    comparison_check, reducibility_detectors, ComparisonReport, Criterion, DetectorHit,
};
pub use generators::{
    peripheral_instance, random_irreducible, random_nonnegative, random_reducible,
    PeripheralInstance,
};

use properties::PropertyFn;

/// A named check, with the short label it can also be selected by.
pub struct Property {
    pub name: &'static str,
    pub alias: &'static str,
    pub summary: &'static str,
    run: PropertyFn,
}

static PROPERTIES: &[Property] = &[
    Property {
        name: "irreducible_has_positive_radius",
        alias: "turo",
        summary: "an irreducible matrix has positive spectral radius",
        run: properties::irreducible_has_positive_radius,
    },
    Property {
        name: "irreducibility_matches_enumeration",
        alias: "oracle",
        summary: "the digraph irreducibility test agrees with exhaustive subset enumeration",
        run: properties::irreducibility_matches_enumeration,
    },
    Property {
        name: "comparison_strict_decrease",
        alias: "compa",
        summary: "a proper minorant of an irreducible matrix has smaller spectral radius",
        run: properties::comparison_strict_decrease,
    },
    Property {
        name: "semi_commuting_partner_commutes",
        alias: "pcu1",
        summary: "operators semi-commuting with an irreducible matrix commute with it",
        run: properties::semi_commuting_partner_commutes,
    },
    Property {
        name: "positive_eigenpair_forces_commuting",
        alias: "scc",
        summary: "a shared strictly positive eigenpair forces semi-commuting operators to commute",
        run: properties::positive_eigenpair_forces_commuting,
    },
    Property {
        name: "commutator_is_nilpotent",
        alias: "quasi",
        summary: "the commutator of a semi-commuting pair is nilpotent",
        run: properties::commutator_is_nilpotent,
    },
    Property {
        name: "peripheral_power_limit",
        alias: "hyper",
        summary: "normalized powers along multiples of the period converge to the peripheral projection",
        run: properties::peripheral_power_limit,
    },
    Property {
        name: "single_cycle_for_irreducible",
        alias: "rem",
        summary: "an irreducible operator permutes its peripheral pieces in one cycle",
        run: properties::single_cycle_for_irreducible,
    },
    Property {
        name: "local_radius_dominates_common_eigenvalue",
        alias: "peris",
        summary: "local radii at positive vectors dominate the common eigenvalue",
        run: properties::local_radius_dominates_common_eigenvalue,
    },
    Property {
        name: "commutant_chain_shares_eigenvector",
        alias: "perisc3",
        summary: "members of the commutant of the expanded operator share its eigenvector pair",
        run: properties::commutant_chain_shares_eigenvector,
    },
    Property {
        name: "local_radius_gap_forces_reducible_sides",
        alias: "app1",
        summary: "a local radius gap makes both super-commutants reducible",
        run: properties::local_radius_gap_forces_reducible_sides,
    },
    Property {
        name: "reducibility_criteria_certify",
        alias: "sver",
        summary: "triggered reducibility criteria come with invariant ideals, and never fire on irreducible input",
        run: properties::reducibility_criteria_certify,
    },
];

pub fn properties() -> &'static [Property] {
    PROPERTIES
}

pub fn find_property(label: &str) -> Option<&'static Property> {
    PROPERTIES
        .iter()
        .find(|p| p.name == label || p.alias == label)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
    Skip(String),
}

/// Outcome of one trial, with the instance it ran on.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub verdict: Verdict,
    pub margin: Option<f64>,
    pub matrices: Vec<(String, DMatrix<f64>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Property names or aliases; all properties when absent.
    pub only: Option<Vec<String>>,
}

impl SuiteConfig {
    pub fn new(dims: Vec<usize>, trials: usize, seed: u64) -> Self {
        SuiteConfig {
            dims,
            trials,
            seed,
            tolerances: Tolerances::default(),
            only: None,
        }
    }

    pub fn only(mut self, labels: &[&str]) -> Self {
        self.only = Some(labels.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn validate(&self) -> Result<Vec<&'static Property>> {
        if self.trials == 0 {
            return Err(Error::PreconditionViolation(
                "trials must be at least 1".into(),
            ));
        }
        if self.dims.is_empty() || self.dims.iter().any(|n| !(2..=64).contains(n)) {
            return Err(Error::PreconditionViolation(format!(
                "dimensions {:?} must be nonempty and within [2, 64]",
                self.dims
            )));
        }
        self.tolerances.validate()?;
        match &self.only {
            None => Ok(PROPERTIES.iter().collect()),
            Some(labels) => {
                let mut chosen: Vec<&'static Property> = Vec::new();
                for l in labels {
                    let p = find_property(l).ok_or_else(|| {
                        Error::PreconditionViolation(format!("unknown property {l:?}"))
                    })?;
                    if !chosen.iter().any(|c| c.name == p.name) {
                        chosen.push(p);
                    }
                }
                chosen.sort_by_key(|p| PROPERTIES.iter().position(|q| q.name == p.name));
                Ok(chosen)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: MatrixFile,
}

/// Everything needed to rerun a failing trial.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub reason: String,
    pub margin: Option<f64>,
    pub matrices: Vec<NamedMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    /// Smallest margin seen; positive margins mean the check held with room.
    pub worst_margin: Option<f64>,
    /// First failing trial.
    pub counterexample: Option<Counterexample>,
    /// First reason a trial was skipped.
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub properties: Vec<PropertyReport>,
    pub total_pass: usize,
    pub total_fail: usize,
    pub total_skipped: usize,
    /// Seconds; the only field that varies between identical runs.
    pub wall_time: f64,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.total_fail == 0
    }

    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        let name = find_property(name).map(|p| p.name).unwrap_or(name);
        self.properties.iter().find(|p| p.name == name)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed of trial `t` of a property: depends only on the suite seed, the
/// property name and `t`.
pub fn trial_seed(seed: u64, property: &str, t: usize) -> u64 {
    splitmix64(splitmix64(seed ^ name_hash(property)).wrapping_add(t as u64))
}

/// Reruns one trial of a property from its seed and dimension.
pub fn replay_trial(property: &str, seed: u64, n: usize, tol: &Tolerances) -> Result<TrialResult> {
    let p = find_property(property)
        .ok_or_else(|| Error::PreconditionViolation(format!("unknown property {property:?}")))?;
    if !(2..=64).contains(&n) {
        return Err(Error::PreconditionViolation(format!(
            "dimension {n} outside [2, 64]"
        )));
    }
    Ok((p.run)(n, seed, tol))
}

fn summarize(p: &Property, results: Vec<(usize, u64, usize, TrialResult)>) -> PropertyReport {
    let mut report = PropertyReport {
        name: p.name.to_string(),
        pass: 0,
        fail: 0,
        skipped: 0,
        worst_margin: None,
        counterexample: None,
        skip_reason: None,
    };
    for (t, seed, n, r) in results {
        if let Some(m) = r.margin.filter(|m| m.is_finite()) {
            if !matches!(r.verdict, Verdict::Skip(_)) {
                report.worst_margin = Some(report.worst_margin.map_or(m, |w: f64| w.min(m)));
            }
        }
        match r.verdict {
            Verdict::Pass => report.pass += 1,
            Verdict::Skip(reason) => {
                report.skipped += 1;
                report.skip_reason.get_or_insert(reason);
            }
            Verdict::Fail(reason) => {
                report.fail += 1;
                if report.counterexample.is_none() {
                    report.counterexample = Some(Counterexample {
                        trial: t,
                        seed,
                        n,
                        reason,
                        margin: r.margin,
                        matrices: r
                            .matrices
                            .iter()
                            .map(|(name, m)| NamedMatrix {
                                name: name.clone(),
                                matrix: MatrixFile::from_matrix(m),
                            })
                            .collect(),
                    });
                }
            }
        }
    }
    report
}

/// Runs every selected property for `config.trials` trials, cycling through
/// `config.dims`. Trials run in parallel; the report does not depend on
/// scheduling.
pub fn run_theorem_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let chosen = config.validate()?;
    let start = Instant::now();
    let tol = config.tolerances;
    let mut reports = Vec::with_capacity(chosen.len());
    for p in chosen {
        let results: Vec<(usize, u64, usize, TrialResult)> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let n = config.dims[t % config.dims.len()];
                let seed = trial_seed(config.seed, p.name, t);
                (t, seed, n, (p.run)(n, seed, &tol))
            })
            .collect();
        reports.push(summarize(p, results));
    }
    let total_pass = reports.iter().map(|r| r.pass).sum();
    let total_fail = reports.iter().map(|r| r.fail).sum();
    let total_skipped = reports.iter().map(|r| r.skipped).sum();
    Ok(SuiteReport {
        seed: config.seed,
        properties: reports,
        total_pass,
        total_fail,
        total_skipped,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
