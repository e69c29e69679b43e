//! p-values, Benjamini–Hochberg step-up and confusion counts.
//!
//! p-values are one-sided upper tail, `p_j = Phi_bar((X_j - mu0) / sigma0)`:
//! non-null effects in the misspecified-null demonstration shift upward.

use serde::{Deserialize, Serialize};

use crate::charfn::SampleVector;
use crate::datagen::MixtureTruth;
use crate::dist::normal_survival;
use crate::error::{Error, Result};
use crate::null::NullParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueVector {
    values: Vec<f64>,
}

impl PValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::domain(format!("p-value at index {i} is outside [0, 1]: {}", values[i])));
        }
        Ok(PValueVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionSet {
    /// Rejected indices, ascending.
    pub rejected: Vec<usize>,
    /// `p*`; `None` when nothing is rejected.
    pub threshold: Option<f64>,
    pub q: f64,
    /// Number of hypotheses tested.
    pub n: usize,
}

impl RejectionSet {
    pub fn len(&self) -> usize {
        self.rejected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }
}

pub fn pvalues_from_z(data: &SampleVector, null: NullParams) -> PValueVector {
    let (mu0, s0) = (null.mu0, null.sigma0());
    PValueVector { values: data.values().iter().map(|&x| normal_survival((x - mu0) / s0)).collect() }
}

/// Benjamini–Hochberg step-up at level `q`: with sorted p-values
/// `p_(1) <= ... <= p_(n)`, find the largest `k` with `p_(k) <= k q / n` and
/// reject every hypothesis with `p_j <= p_(k)`.
pub fn bh_reject(pvals: &PValueVector, q: f64) -> Result<RejectionSet> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("FDR level q must lie in (0, 1), got {q}")));
    }
    let n = pvals.len();
    let mut sorted = pvals.values.clone();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let threshold = sorted.iter().enumerate().rev().find(|&(i, &p)| p <= (i + 1) as f64 * q / nf).map(|(_, &p)| p);
    let rejected = match threshold {
        Some(t) => (0..n).filter(|&j| pvals.values[j] <= t).collect(),
        None => Vec::new(),
    };
    Ok(RejectionSet { rejected, threshold, q, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positives: usize,
    pub false_positives: usize,
}

/// Counts rejected non-nulls (true positives) and rejected nulls (false positives).
pub fn confusion(rej: &RejectionSet, truth: &MixtureTruth) -> Result<Confusion> {
    if rej.n != truth.len() {
        return Err(Error::IndexMismatch(format!(
            "rejection set covers {} hypotheses, truth has {}",
            rej.n,
            truth.len()
        )));
    }
    let mut c = Confusion { true_positives: 0, false_positives: 0 };
    for &j in &rej.rejected {
        let r = truth.records.get(j).ok_or_else(|| {
            Error::IndexMismatch(format!("rejected index {j} out of range for {} records", truth.len()))
        })?;
        if r.is_null {
            c.false_positives += 1;
        } else {
            c.true_positives += 1;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate, MixtureSpec, RngSeed};
    use proptest::prelude::*;

    /// Threshold form of BH, independent of sorting: the largest p-value
    /// `p_i` with `p_i <= q * #{l : p_l <= p_i} / n`.
    fn brute_force(p: &[f64], q: f64) -> Vec<usize> {
        let n = p.len() as f64;
        let mut best: Option<f64> = None;
        for &pi in p {
            let count = p.iter().filter(|&&pl| pl <= pi).count() as f64;
            if pi <= q * count / n && best.is_none_or(|b| pi > b) {
                best = Some(pi);
            }
        }
        match best {
            Some(b) => (0..p.len()).filter(|&j| p[j] <= b).collect(),
            None => vec![],
        }
    }

    #[test]
    fn pvalue_examples() {
        let null = NullParams::new(1.0, 4.0).unwrap();
        let d = SampleVector::new(vec![1.0, 1.0 + 1.6448536269514722 * 2.0]).unwrap();
        let p = pvalues_from_z(&d, null);
        assert_eq!(p.values()[0], 0.5);
        assert!((p.values()[1] - 0.05).abs() < 1e-6);

        let d = SampleVector::new(vec![2.0]).unwrap();
        let a = pvalues_from_z(&d, NullParams::from_sd(0.0, 0.95).unwrap()).values()[0];
        let b = pvalues_from_z(&d, NullParams::standard()).values()[0];
        assert!((a - normal_survival(2.0 / 0.95)).abs() < 1e-15);
        assert!((a - 0.01763).abs() < 1e-4, "{a}");
        assert!((b - 0.02275).abs() < 1e-5, "{b}");
    }

    #[test]
    fn bh_examples() {
        let p = PValueVector::new(vec![0.01, 0.5]).unwrap();
        let r = bh_reject(&p, 0.05).unwrap();
        assert_eq!(r.rejected, vec![0]);
        assert_eq!(r.threshold, Some(0.01));

        let p = PValueVector::new(vec![1.0; 7]).unwrap();
        assert!(bh_reject(&p, 0.05).unwrap().is_empty());
        assert!(bh_reject(&p, 0.0).is_err());
        assert!(PValueVector::new(vec![1.2]).is_err());
    }

    #[test]
    fn ties_rejected_together() {
        let p = PValueVector::new(vec![0.02, 0.02, 0.02, 0.9]).unwrap();
        let r = bh_reject(&p, 0.1).unwrap();
        assert_eq!(r.rejected, vec![0, 1, 2]);
    }

    #[test]
    fn confusion_counts() {
        let spec = MixtureSpec::main_step(100, 0.1, 1.0);
        let (_, truth) = generate(&spec, RngSeed::new(1)).unwrap();
        let none = RejectionSet { rejected: vec![], threshold: None, q: 0.05, n: 100 };
        assert_eq!(confusion(&none, &truth).unwrap(), Confusion { true_positives: 0, false_positives: 0 });
        let all = RejectionSet { rejected: (0..100).collect(), threshold: Some(1.0), q: 0.05, n: 100 };
        assert_eq!(confusion(&all, &truth).unwrap(), Confusion { true_positives: 10, false_positives: 90 });
        let bad = RejectionSet { rejected: vec![0], threshold: Some(0.1), q: 0.05, n: 99 };
        assert!(matches!(confusion(&bad, &truth), Err(Error::IndexMismatch(_))));
    }

    proptest! {
        #[test]
        fn bh_matches_brute_force(
            p in prop::collection::vec(prop_oneof![0.0f64..1.0, Just(0.01), Just(0.04)], 1..=12),
            q in 0.01f64..0.99,
        ) {
            let pv = PValueVector::new(p.clone()).unwrap();
            prop_assert_eq!(bh_reject(&pv, q).unwrap().rejected, brute_force(&p, q));
        }

        #[test]
        fn bh_monotone_in_q(p in prop::collection::vec(0.0f64..0.3, 1..40), q1 in 0.01f64..0.5, dq in 0.0f64..0.4) {
            let pv = PValueVector::new(p).unwrap();
            let a = bh_reject(&pv, q1).unwrap();
            let b = bh_reject(&pv, (q1 + dq).min(0.99)).unwrap();
            prop_assert!(a.rejected.iter().all(|j| b.rejected.contains(j)));
        }

        #[test]
        fn pvalues_decrease_in_x(x in -8.0f64..8.0, dx in 0.001f64..3.0) {
            let d = SampleVector::new(vec![x, x + dx]).unwrap();
            let p = pvalues_from_z(&d, NullParams::new(0.2, 1.3).unwrap());
            prop_assert!(p.values()[1] <= p.values()[0]);
        }
    }
}
