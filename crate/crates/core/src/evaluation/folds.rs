//! Seizure-wise and patient-wise fold allocation.
//!
//! "Equally and randomly" is realized by a seeded shuffle followed by
//! round-robin dealing: randomness lives in the shuffle, equality holds by
//! construction.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{SeizureEvent, SeizureType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvMode {
    #[serde(rename = "seizure")]
    SeizureWise,
    #[serde(rename = "patient")]
    PatientWise,
}

impl CvMode {
    pub fn default_folds(&self) -> usize {
        match self {
            CvMode::SeizureWise => 5,
            CvMode::PatientWise => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CvMode::SeizureWise => "seizure",
            CvMode::PatientWise => "patient",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "seizure" | "seizure-wise" => Ok(CvMode::SeizureWise),
            "patient" | "patient-wise" => Ok(CvMode::PatientWise),
            other => Err(Error::spec(
                "cv mode",
                format!("{other:?} is not one of seizure, patient"),
            )),
        }
    }
}

/// Disjoint, covering partition of seizures into k folds.
///
/// Seizure ids are event indices in the originating manifest/event slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub mode: CvMode,
    pub seed: u64,
    /// seizure id -> fold index.
    pub fold_of: BTreeMap<u32, u32>,
    /// patient -> fold; populated in patient-wise mode.
    pub patient_folds: BTreeMap<String, u32>,
    /// Type processing order; populated in patient-wise mode.
    pub type_order: Vec<SeizureType>,
}

impl FoldAssignment {
    pub fn fold(&self, seizure_id: u32) -> Option<u32> {
        self.fold_of.get(&seizure_id).copied()
    }

    /// Seizure count per fold.
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &f in self.fold_of.values() {
            sizes[f as usize] += 1;
        }
        sizes
    }
}

/// Deal each type's seizures into k folds after a seeded shuffle.
///
/// Within every type the per-fold counts differ by at most one.
pub fn seizure_wise_folds(events: &[SeizureEvent], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::spec("fold count", format!("k = {k} must be >= 2")));
    }
    if events.is_empty() {
        return Err(Error::EmptyInput("events"));
    }

    let mut by_type: BTreeMap<SeizureType, Vec<u32>> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        by_type.entry(e.ty).or_default().push(i as u32);
    }
    for (ty, ids) in &by_type {
        if ids.len() < k {
            return Err(Error::InsufficientSeizures {
                ty: ty.code().to_string(),
                have: ids.len(),
                need: k,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = BTreeMap::new();
    for ids in by_type.values_mut() {
        ids.shuffle(&mut rng);
        for (j, id) in ids.iter().enumerate() {
            fold_of.insert(*id, (j % k) as u32);
        }
    }

    Ok(FoldAssignment {
        k,
        mode: CvMode::SeizureWise,
        seed,
        fold_of,
        patient_folds: BTreeMap::new(),
        type_order: Vec::new(),
    })
}

/// Allocate whole patients to folds, processing types in ascending patient
/// count (ties by type code) and skipping patients already allocated under
/// an earlier type.
pub fn patient_wise_folds(events: &[SeizureEvent], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::spec("fold count", format!("k = {k} must be >= 2")));
    }
    if events.is_empty() {
        return Err(Error::EmptyInput("events"));
    }

    let mut patients_by_type: BTreeMap<SeizureType, BTreeSet<&str>> = BTreeMap::new();
    for e in events {
        patients_by_type
            .entry(e.ty)
            .or_default()
            .insert(e.patient_id.as_str());
    }

    let mut order: Vec<SeizureType> = patients_by_type.keys().copied().collect();
    order.sort_by(|a, b| {
        patients_by_type[a]
            .len()
            .cmp(&patients_by_type[b].len())
            .then(a.code().cmp(b.code()))
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut patient_folds: BTreeMap<String, u32> = BTreeMap::new();
    for ty in &order {
        let mut unallocated: Vec<&str> = patients_by_type[ty]
            .iter()
            .copied()
            .filter(|p| !patient_folds.contains_key(*p))
            .collect();
        if unallocated.len() < k {
            return Err(Error::InsufficientPatients {
                ty: ty.code().to_string(),
                have: unallocated.len(),
                need: k,
            });
        }
        unallocated.shuffle(&mut rng);
        for (j, p) in unallocated.iter().enumerate() {
            patient_folds.insert(p.to_string(), (j % k) as u32);
        }
    }

    let mut fold_of = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        // Every patient was allocated when their first in-order type ran.
        let fold = patient_folds[e.patient_id.as_str()];
        fold_of.insert(i as u32, fold);
    }

    Ok(FoldAssignment {
        k,
        mode: CvMode::PatientWise,
        seed,
        fold_of,
        patient_folds,
        type_order: order,
    })
}

pub fn make_folds(
    events: &[SeizureEvent],
    mode: CvMode,
    k: usize,
    seed: u64,
) -> Result<FoldAssignment> {
    match mode {
        CvMode::SeizureWise => seizure_wise_folds(events, k, seed),
        CvMode::PatientWise => patient_wise_folds(events, k, seed),
    }
}

/// Per-seed fold seizure counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedBalance {
    pub seed: u64,
    pub fold_counts: Vec<usize>,
    /// `max_ij |count_i - count_j|` for this seed.
    pub max_deviation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub mode: CvMode,
    pub k: usize,
    pub per_seed: Vec<SeedBalance>,
    pub max_deviation_overall: usize,
}

/// Measure how much fold seizure counts move across seeds.
pub fn fold_balance_report(
    events: &[SeizureEvent],
    k: usize,
    mode: CvMode,
    seeds: &[u64],
) -> Result<BalanceReport> {
    if seeds.len() < 2 {
        return Err(Error::spec(
            "balance report",
            format!("needs at least 2 seeds, got {}", seeds.len()),
        ));
    }
    let mut per_seed = Vec::with_capacity(seeds.len());
    let mut overall = 0usize;
    for &seed in seeds {
        let assignment = make_folds(events, mode, k, seed)?;
        let counts = assignment.fold_sizes();
        let max = counts.iter().max().copied().unwrap_or(0);
        let min = counts.iter().min().copied().unwrap_or(0);
        let deviation = max - min;
        overall = overall.max(deviation);
        per_seed.push(SeedBalance {
            seed,
            fold_counts: counts,
            max_deviation: deviation,
        });
    }
    Ok(BalanceReport {
        mode,
        k,
        per_seed,
        max_deviation_overall: overall,
    })
}
