//! Role-inverted few-shot judging of a coarse/refined mask pair.
//!
//! The query image and a candidate mask become the *support* prompt, and a
//! held-out image with trusted ground truth becomes the *query*. Whichever
//! candidate makes the oracle reproduce that ground truth better wins.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fss::{predict, FssBackend, SupportPair};
use crate::maskcore::{iou, BinaryMask};
use crate::raster::RgbImage;

/// A held-out image with its trusted mask for the judged class.
#[derive(Debug, Clone, Copy)]
pub struct JudgeSupport<'a> {
    pub image: &'a RgbImage,
    pub mask: &'a BinaryMask,
}

#[derive(Debug, Clone)]
pub struct JudgeCase<'a> {
    pub query_image: &'a RgbImage,
    pub coarse: &'a BinaryMask,
    pub refined: &'a BinaryMask,
    pub supports: Vec<JudgeSupport<'a>>,
    pub class_id: u8,
}

impl JudgeCase<'_> {
    pub fn validate(&self) -> Result<()> {
        let qd = self.query_image.dims();
        for (what, m) in [("coarse", self.coarse), ("refined", self.refined)] {
            if m.dims() != qd {
                return Err(Error::dimension(m.dims(), qd).with_context(format!("{what} mask vs query image")));
            }
        }
        if self.supports.is_empty() {
            return Err(Error::Config("judge case needs at least one support".into()));
        }
        for (i, s) in self.supports.iter().enumerate() {
            if s.image.dims() != s.mask.dims() {
                return Err(Error::dimension(s.mask.dims(), s.image.dims())
                    .with_context(format!("support {i} mask vs image")));
            }
            if s.image == self.query_image {
                return Err(Error::Config(format!(
                    "support {i} is the query image itself"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    RefinedBetter,
    CoarseBetter,
    Tie,
}

impl Verdict {
    pub fn from_scores(e_coarse: f64, e_refined: f64) -> Self {
        if e_refined > e_coarse {
            Verdict::RefinedBetter
        } else if e_coarse > e_refined {
            Verdict::CoarseBetter
        } else {
            Verdict::Tie
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Verdict::RefinedBetter => Verdict::CoarseBetter,
            Verdict::CoarseBetter => Verdict::RefinedBetter,
            Verdict::Tie => Verdict::Tie,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::RefinedBetter => "RefinedBetter",
            Verdict::CoarseBetter => "CoarseBetter",
            Verdict::Tie => "Tie",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "RefinedBetter" => Ok(Verdict::RefinedBetter),
            "CoarseBetter" => Ok(Verdict::CoarseBetter),
            "Tie" => Ok(Verdict::Tie),
            other => Err(Error::Config(format!("unknown verdict `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeResult {
    pub e_coarse: f64,
    pub e_refined: f64,
    pub verdict: Verdict,
    /// `(coarse score, refined score)` for each support, in support order.
    pub per_support: Vec<(f64, f64)>,
}

impl JudgeResult {
    /// Aggregates per-support scores by their arithmetic mean.
    pub fn from_per_support(per_support: Vec<(f64, f64)>) -> Self {
        let n = per_support.len() as f64;
        let e_coarse = per_support.iter().map(|p| p.0).sum::<f64>() / n;
        let e_refined = per_support.iter().map(|p| p.1).sum::<f64>() / n;
        Self {
            e_coarse,
            e_refined,
            verdict: Verdict::from_scores(e_coarse, e_refined),
            per_support,
        }
    }
}

pub fn judge(backend: &dyn FssBackend, case: &JudgeCase<'_>) -> Result<JudgeResult> {
    case.validate()?;
    let mut per_support = Vec::with_capacity(case.supports.len());
    for (i, s) in case.supports.iter().enumerate() {
        let score = |prompt: &BinaryMask| -> Result<f64> {
            let pair = SupportPair::new(case.query_image, prompt)?;
            let smp = predict(backend, s.image, &[pair])?;
            iou(&smp, s.mask)
        };
        let attach = |e: Error| match e {
            Error::Backend(msg) => Error::Backend(format!("support {i}: {msg}")),
            other => other,
        };
        let e_c = score(case.coarse).map_err(attach)?;
        let e_r = score(case.refined).map_err(attach)?;
        per_support.push((e_c, e_r));
    }
    Ok(JudgeResult::from_per_support(per_support))
}

/// Keeps the refined mask only on a `RefinedBetter` verdict.
pub fn pick<'m>(verdict: Verdict, coarse: &'m BinaryMask, refined: &'m BinaryMask) -> &'m BinaryMask {
    match verdict {
        Verdict::RefinedBetter => refined,
        Verdict::CoarseBetter | Verdict::Tie => coarse,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fss::{resample_nearest, EchoBackend};

    fn img(w: u32, h: u32, v: u8) -> RgbImage {
        RgbImage::filled(w, h, [v, v, v])
    }

    #[test]
    fn identical_masks_tie() {
        let q = img(6, 6, 10);
        let s = img(6, 6, 20);
        let m = BinaryMask::from_fn(6, 6, |x, y| x < 3 && y < 4);
        let gt = BinaryMask::from_fn(6, 6, |x, _| x < 3);
        let case = JudgeCase {
            query_image: &q,
            coarse: &m,
            refined: &m,
            supports: vec![JudgeSupport { image: &s, mask: &gt }],
            class_id: 1,
        };
        let r = judge(&EchoBackend, &case).unwrap();
        assert_eq!(r.verdict, Verdict::Tie);
        assert_eq!(r.e_coarse, r.e_refined);
    }

    #[test]
    fn echo_scores_match_closed_form() {
        let q = img(4, 4, 1);
        let s = img(8, 6, 2);
        let coarse = BinaryMask::from_fn(4, 4, |x, y| x + y < 3);
        let refined = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        let gt = BinaryMask::from_fn(8, 6, |x, _| x < 4);
        let case = JudgeCase {
            query_image: &q,
            coarse: &coarse,
            refined: &refined,
            supports: vec![JudgeSupport { image: &s, mask: &gt }],
            class_id: 3,
        };
        let r = judge(&EchoBackend, &case).unwrap();
        assert_eq!(r.e_coarse, iou(&resample_nearest(&coarse, 8, 6), &gt).unwrap());
        assert_eq!(r.e_refined, 1.0);
        assert_eq!(r.verdict, Verdict::RefinedBetter);
    }

    #[test]
    fn multi_support_mean_and_identical_supports() {
        let q = img(4, 4, 1);
        let s = img(4, 4, 2);
        let coarse = BinaryMask::from_fn(4, 4, |x, _| x < 1);
        let refined = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        let gt = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        let single = JudgeCase {
            query_image: &q,
            coarse: &coarse,
            refined: &refined,
            supports: vec![JudgeSupport { image: &s, mask: &gt }],
            class_id: 1,
        };
        let triple = JudgeCase {
            supports: vec![JudgeSupport { image: &s, mask: &gt }; 3],
            ..single.clone()
        };
        let a = judge(&EchoBackend, &single).unwrap();
        let b = judge(&EchoBackend, &triple).unwrap();
        assert_eq!(a.e_coarse, b.e_coarse);
        assert_eq!(a.e_refined, b.e_refined);
        assert_eq!(b.per_support.len(), 3);
    }

    #[test]
    fn query_image_cannot_be_its_own_support() {
        let q = img(3, 3, 5);
        let m = BinaryMask::empty(3, 3);
        let case = JudgeCase {
            query_image: &q,
            coarse: &m,
            refined: &m,
            supports: vec![JudgeSupport { image: &q, mask: &m }],
            class_id: 1,
        };
        assert!(judge(&EchoBackend, &case).is_err());
        let no_support = JudgeCase {
            supports: vec![],
            ..case
        };
        assert!(judge(&EchoBackend, &no_support).is_err());
    }

    #[test]
    fn mismatched_coarse_is_dimension_error() {
        let q = img(3, 3, 5);
        let s = img(3, 3, 6);
        let bad = BinaryMask::empty(2, 3);
        let ok = BinaryMask::empty(3, 3);
        let case = JudgeCase {
            query_image: &q,
            coarse: &bad,
            refined: &ok,
            supports: vec![JudgeSupport { image: &s, mask: &ok }],
            class_id: 1,
        };
        assert!(matches!(judge(&EchoBackend, &case), Err(Error::Dimension { .. })));
    }

    #[test]
    fn pick_rule() {
        let c = BinaryMask::empty(2, 2);
        let r = BinaryMask::full(2, 2);
        assert!(std::ptr::eq(pick(Verdict::RefinedBetter, &c, &r), &r));
        assert!(std::ptr::eq(pick(Verdict::Tie, &c, &r), &c));
        assert!(std::ptr::eq(pick(Verdict::CoarseBetter, &c, &r), &c));
    }

    #[test]
    fn verdict_round_trips_through_strings() {
        for v in [Verdict::RefinedBetter, Verdict::CoarseBetter, Verdict::Tie] {
            assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
            assert_eq!(v.flipped().flipped(), v);
        }
    }
}
