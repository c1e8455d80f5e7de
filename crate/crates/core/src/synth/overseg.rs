use std::collections::VecDeque;

use rand::seq::index;

use super::rng_for;
use crate::error::{Error, Result};
use crate::maskcore::{BinaryMask, LabelMap};

/// 4-connected components of equal label, in row-major order of first pixel.
/// Each component is returned as its pixel indices in discovery order.
pub fn label_components(labels: &LabelMap) -> Vec<Vec<usize>> {
    let (w, h) = (labels.width() as usize, labels.height() as usize);
    let lab = labels.labels();
    let mut seen = vec![false; lab.len()];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..lab.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            for j in neighbors(i, w, h) {
                if !seen[j] && lab[j] == lab[start] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

fn neighbors(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (i % w, i / w);
    [
        (x > 0).then(|| i - 1),
        (x + 1 < w).then(|| i + 1),
        (y > 0).then(|| i - w),
        (y + 1 < h).then(|| i + w),
    ]
    .into_iter()
    .flatten()
}

/// Splits every connected GT region (background included) into at most
/// `granularity` contiguous parts by multi-seed breadth-first growth.
pub fn oversegment(gt: &LabelMap, seed: u64, granularity: u32) -> Result<Vec<BinaryMask>> {
    if granularity == 0 {
        return Err(Error::Config("granularity must be >= 1".into()));
    }
    let (w, h) = gt.dims();
    let (wu, hu) = (w as usize, h as usize);
    let mut rng = rng_for(seed, 0);
    let mut part_of = vec![usize::MAX; wu * hu];
    let mut parts = Vec::new();
    for comp in label_components(gt) {
        let k = comp.len().min(granularity as usize);
        let base = parts.len();
        let mut queue = VecDeque::new();
        let mut pick: Vec<usize> = index::sample(&mut rng, comp.len(), k).into_vec();
        pick.sort_unstable();
        for (p, &ci) in pick.iter().enumerate() {
            part_of[comp[ci]] = base + p;
            queue.push_back(comp[ci]);
        }
        let label = gt.labels()[comp[0]];
        while let Some(i) = queue.pop_front() {
            for j in neighbors(i, wu, hu) {
                if part_of[j] == usize::MAX && gt.labels()[j] == label {
                    part_of[j] = part_of[i];
                    queue.push_back(j);
                }
            }
        }
        parts.extend((0..k).map(|_| BinaryMask::empty(w, h)));
    }
    for (i, &p) in part_of.iter().enumerate() {
        parts[p].set_index(i, true);
    }
    Ok(parts)
}
