//! Overlap-driven refinement of coarse class masks with class-agnostic segments.
//!
//! Each candidate segment is assigned to the class whose coarse mask it
//! overlaps most (lowest class id on ties); candidates touching no coarse mask
//! are discarded. A class's refined mask is the union of its assigned
//! candidates whose overlap fraction `|S ∩ M_k| / |S|` reaches
//! `min_overlap_fraction`, falling back to the coarse mask when none survive.

use std::collections::BTreeMap;

use crate::dataio::CandidateBank;
use crate::error::{Error, Result};
use crate::maskcore::BinaryMask;

pub type ClassMasks = BTreeMap<u8, BinaryMask>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub candidate_index: usize,
    /// `None` when the candidate overlaps no coarse mask.
    pub assigned_class: Option<u8>,
    pub overlap_by_class: BTreeMap<u8, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    pub min_overlap_fraction: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            min_overlap_fraction: 0.0,
        }
    }
}

impl RefineConfig {
    pub fn new(min_overlap_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&min_overlap_fraction) {
            return Err(Error::Config(format!(
                "min overlap fraction must lie in [0, 1], got {min_overlap_fraction}"
            )));
        }
        Ok(Self {
            min_overlap_fraction,
        })
    }
}

fn check_dims(coarse: &ClassMasks, bank: &CandidateBank) -> Result<()> {
    let mut dims = None;
    let all = coarse
        .iter()
        .map(|(k, m)| (format!("coarse class {k}"), m))
        .chain(
            bank.candidates
                .iter()
                .enumerate()
                .map(|(i, m)| (format!("candidate {i}"), m)),
        );
    for (what, m) in all {
        match dims {
            None => dims = Some(m.dims()),
            Some(d) if d != m.dims() => {
                return Err(Error::dimension(m.dims(), d).with_context(what));
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn assign_candidates(coarse: &ClassMasks, bank: &CandidateBank) -> Result<Vec<Assignment>> {
    check_dims(coarse, bank)?;
    let mut out = Vec::with_capacity(bank.len());
    for (candidate_index, cand) in bank.candidates.iter().enumerate() {
        let mut overlap_by_class = BTreeMap::new();
        let mut best: Option<(u8, u64)> = None;
        // BTreeMap iterates in ascending class id, so strict `>` keeps the lowest id on ties.
        for (&class_id, mask) in coarse {
            let overlap = cand.intersection_count(mask)?;
            overlap_by_class.insert(class_id, overlap);
            if overlap > 0 && best.is_none_or(|(_, b)| overlap > b) {
                best = Some((class_id, overlap));
            }
        }
        out.push(Assignment {
            candidate_index,
            assigned_class: best.map(|(k, _)| k),
            overlap_by_class,
        });
    }
    Ok(out)
}

pub fn select_and_merge(
    assignments: &[Assignment],
    bank: &CandidateBank,
    coarse: &ClassMasks,
    config: &RefineConfig,
) -> Result<ClassMasks> {
    let mut merged: BTreeMap<u8, BinaryMask> = BTreeMap::new();
    for a in assignments {
        let Some(class_id) = a.assigned_class else { continue };
        let cand = bank.candidates.get(a.candidate_index).ok_or_else(|| {
            Error::Config(format!(
                "assignment refers to candidate {} but the bank holds {}",
                a.candidate_index,
                bank.len()
            ))
        })?;
        let area = cand.count();
        let overlap = a.overlap_by_class.get(&class_id).copied().unwrap_or(0);
        let fraction = if area == 0 { 0.0 } else { overlap as f64 / area as f64 };
        if fraction < config.min_overlap_fraction {
            continue;
        }
        match merged.get_mut(&class_id) {
            Some(m) => m.or_assign(cand)?,
            None => {
                merged.insert(class_id, cand.clone());
            }
        }
    }
    Ok(coarse
        .iter()
        .map(|(&k, c)| (k, merged.remove(&k).unwrap_or_else(|| c.clone())))
        .collect())
}

pub fn refine(coarse: &ClassMasks, bank: &CandidateBank, config: &RefineConfig) -> Result<ClassMasks> {
    let assignments = assign_candidates(coarse, bank)?;
    select_and_merge(&assignments, bank, coarse, config)
}
