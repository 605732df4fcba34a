//! Scoring metrics, generic over the scalar type.
//!
//! Predictions are `Option<Label>`; `None` is an unparseable answer and is
//! wrong for every gold label. It adds a false negative to the gold class
//! and nothing to the other class.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::num::{mean, Scalar};
use crate::suite::Label;

/// F1 from confusion counts; 0 when the class is absent from both the
/// predictions and the labels.
pub fn class_f1<T: Scalar>(tp: usize, fp: usize, fn_: usize) -> T {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        return T::zero();
    }
    T::from_count(2 * tp) / T::from_count(denom)
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b || a == 0 {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

fn f1_for<T: Scalar>(class: Label, preds: &[Option<Label>], labels: &[Label]) -> T {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, l) in preds.iter().zip(labels) {
        match (*p == Some(class), *l == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    class_f1(tp, fp, fn_)
}

/// Mean of the valid-class and invalid-class F1 within one sample, on a
/// 0..=1 scale.
pub fn sample_macro_f1<T: Scalar>(preds: &[Option<Label>], labels: &[Label]) -> Result<T> {
    check_lengths(preds.len(), labels.len())?;
    let valid: T = f1_for(Label::Valid, preds, labels);
    let invalid: T = f1_for(Label::Invalid, preds, labels);
    Ok((valid + invalid) / T::from_count(2))
}

/// 1 iff every option of the sample is judged correctly.
pub fn coherence<T: Scalar>(preds: &[Option<Label>], labels: &[Label]) -> Result<T> {
    check_lengths(preds.len(), labels.len())?;
    Ok(if preds.iter().zip(labels).all(|(p, l)| *p == Some(*l)) {
        T::one()
    } else {
        T::zero()
    })
}

/// Fraction of options judged correctly within one sample.
pub fn option_accuracy<T: Scalar>(preds: &[Option<Label>], labels: &[Label]) -> Result<T> {
    check_lengths(preds.len(), labels.len())?;
    let right = preds.iter().zip(labels).filter(|(p, l)| **p == Some(**l)).count();
    Ok(T::from_count(right) / T::from_count(labels.len()))
}

/// Both sides must already be NFC-normalized and case-folded.
pub fn exact_match(pred: Option<&str>, gold: &str) -> bool {
    pred == Some(gold)
}

/// Cohen's kappa between two annotators. Full agreement on a single label
/// (chance agreement 1) yields 1.
pub fn cohens_kappa<T: Scalar, L: Ord + Clone>(a: &[L], b: &[L]) -> Result<T> {
    check_lengths(a.len(), b.len())?;
    let n = a.len();
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    let mut marg: BTreeMap<&L, (usize, usize)> = BTreeMap::new();
    for x in a {
        marg.entry(x).or_default().0 += 1;
    }
    for y in b {
        marg.entry(y).or_default().1 += 1;
    }
    let nn = T::from_count(n * n);
    let p_o = T::from_count(agree) / T::from_count(n);
    let p_e = marg
        .values()
        .fold(T::zero(), |acc, (ca, cb)| acc + T::from_count(ca * cb) / nn.clone());
    if p_e == T::one() {
        return Ok(T::one());
    }
    Ok((p_o - p_e.clone()) / (T::one() - p_e))
}

/// Mean of per-sample values scaled to 0..=100.
pub fn percent<T: Scalar>(values: &[T]) -> T {
    mean(values) * T::hundred()
}
