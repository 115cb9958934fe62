//! Rewriting an IFS as compositions of its maps so that all cylinder
//! lengths sit in a window around a target scale.

use serde::Serialize;

use super::split::{split_alphabet, split_alphabet_self, AlphabetSplit};
use super::{CantorIfs, Word};
use crate::error::{Error, Result};
use crate::Mode;

fn check_scale(rho: f64, c0: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("rho must lie in (0,1), got {rho}")));
    }
    if !(c0 > 1.0) || !c0.is_finite() {
        return Err(Error::InvalidArgument(format!("c0 must exceed 1, got {c0}")));
    }
    Ok(())
}

/// Depth-first, lexicographic: extend each word while its cylinder length
/// is at least `threshold`.
fn greedy_words(ifs: &CantorIfs, threshold: f64) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, f64)> = (0..ifs.len())
        .rev()
        .map(|a| (vec![a], ifs.ratio(a)))
        .collect();
    while let Some((w, len)) = stack.pop() {
        if len < threshold {
            out.push((w, len));
        } else {
            for a in (0..ifs.len()).rev() {
                let mut child = w.clone();
                child.push(a);
                stack.push((child, len * ifs.ratio(a)));
            }
        }
    }
    out
}

/// Replace `w` by all its descendants shorter than `bound`, in order.
fn descendants_below(ifs: &CantorIfs, w: &[usize], len: f64, bound: f64) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut stack = vec![(w.to_vec(), len)];
    while let Some((w, len)) = stack.pop() {
        if len < bound {
            out.push((w, len));
        } else {
            for a in (0..ifs.len()).rev() {
                let mut child = w.clone();
                child.push(a);
                stack.push((child, len * ifs.ratio(a)));
            }
        }
    }
    out
}

fn window_error(ifs: &CantorIfs, lo: f64, hi: f64, detail: String) -> Error {
    Error::WindowUnreachable {
        lo,
        hi,
        min_c0: ifs.min_ratio().powf(-0.5),
        detail,
    }
}

/// The IFS generated by the given words; labels are the letters joined by `.`.
pub fn words_to_ifs(ifs: &CantorIfs, words: &[Word]) -> CantorIfs {
    CantorIfs::from_parts(
        words.iter().map(|w| w.to_labels(ifs).join(".")).collect(),
        words.iter().map(|w| ifs.compose(w)).collect(),
    )
}

/// Greedy first entry into the window `(√ρ / c0, c0 √ρ)`.
pub fn refine_words(ifs: &CantorIfs, rho: f64, c0: f64) -> Result<Vec<Word>> {
    check_scale(rho, c0)?;
    let s = rho.sqrt();
    let (lo, hi) = (s / c0, c0 * s);
    let leaves = greedy_words(ifs, hi);
    if let Some((w, len)) = leaves.iter().find(|(_, len)| *len <= lo) {
        let labels = Word::from_indices(w.clone()).to_labels(ifs).join(".");
        return Err(window_error(
            ifs,
            lo,
            hi,
            format!("greedy word `{labels}` jumps from above the window to length {len:e}"),
        ));
    }
    Ok(leaves.into_iter().map(|(w, _)| Word::from_indices(w)).collect())
}

pub fn refine_to_scale(ifs: &CantorIfs, rho: f64, c0: f64) -> Result<CantorIfs> {
    let words = refine_words(ifs, rho, c0)?;
    Ok(words_to_ifs(ifs, &words))
}

/// A pair of IFSs rewritten at scale ρ with an admissible alphabet split.
#[derive(Clone, Debug, Serialize)]
pub struct RetakenPair {
    pub k: CantorIfs,
    pub k_prime: CantorIfs,
    #[serde(skip)]
    pub k_words: Vec<Word>,
    #[serde(skip)]
    pub k_prime_words: Vec<Word>,
    pub split: AlphabetSplit,
}

fn check_window(ifs: &CantorIfs, rho: f64, c0: f64, side: &str) -> Result<()> {
    let s = rho.sqrt();
    let (lo, hi) = (s / c0, c0 * s);
    let mut needed: f64 = 1.0;
    for m in ifs.maps() {
        needed = needed.max(m.ratio / s).max(s / m.ratio);
    }
    if needed >= c0 {
        return Err(Error::WindowUnreachable {
            lo,
            hi,
            min_c0: needed,
            detail: format!("retaken {side} has cylinder lengths outside the window"),
        });
    }
    Ok(())
}

/// Retake both generating families so that all cylinders have length
/// comparable to `√ρ` and the alphabet of `K` splits into long and short
/// letters relative to `K'`.
///
/// Plain greedy refinement of two copies of the same homogeneous set gives
/// identical lengths on both sides, so the long letters are kept at one
/// level and some of them are replaced by their descendants.
pub fn retake_pair(k: &CantorIfs, k_prime: &CantorIfs, rho: f64, c0: f64, mode: Mode) -> Result<RetakenPair> {
    check_scale(rho, c0)?;
    let s = rho.sqrt();
    match mode {
        Mode::CrossSum => retake_cross(k, k_prime, rho, c0, s),
        Mode::SelfSum => retake_self(k, rho, c0, s),
    }
}

fn retake_cross(k: &CantorIfs, kp: &CantorIfs, rho: f64, c0: f64, s: f64) -> Result<RetakenPair> {
    let kp_leaves = greedy_words(kp, s);
    let lp_max = kp_leaves.iter().map(|l| l.1).fold(0.0, f64::max);
    let lp_min = kp_leaves.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);

    let lam_max = k.max_ratio();
    let mut stack: Vec<(Vec<usize>, f64)> = (0..k.len()).rev().map(|a| (vec![a], k.ratio(a))).collect();
    let mut leaves = Vec::new();
    while let Some((w, len)) = stack.pop() {
        if len * lam_max > lp_max {
            for a in (0..k.len()).rev() {
                let mut child = w.clone();
                child.push(a);
                stack.push((child, len * k.ratio(a)));
            }
        } else {
            leaves.push((w, len));
        }
    }

    // Each leaf becomes either a long letter or a block of short descendants.
    let expanded: Vec<Vec<(Vec<usize>, f64)>> = leaves
        .iter()
        .map(|(w, len)| descendants_below(k, w, *len, lp_min))
        .collect();
    let mut long_idx: Vec<usize> = (0..leaves.len()).filter(|&i| leaves[i].1 > lp_max).collect();
    // Shortest first, ties by position.
    long_idx.sort_by(|&a, &b| leaves[a].1.total_cmp(&leaves[b].1).then(a.cmp(&b)));
    let fixed_short: usize = (0..leaves.len())
        .filter(|i| !long_idx.contains(i))
        .map(|i| expanded[i].len())
        .sum();

    let mut best: Option<(usize, usize)> = None;
    let mut best_sizes = (0, 0);
    for convert in 0..=long_idx.len() {
        let n_long = long_idx.len() - convert;
        let n_short = fixed_short + long_idx[..convert].iter().map(|&i| expanded[i].len()).sum::<usize>();
        let third = (n_long + n_short) as f64 / 3.0;
        let score = n_long.min(n_short);
        if score > best_sizes.0.min(best_sizes.1) {
            best_sizes = (n_long, n_short);
        }
        if n_long as f64 > third && n_short as f64 > third && best.is_none_or(|(_, sc)| score > sc) {
            best = Some((convert, score));
        }
    }
    let (convert, _) = best.ok_or_else(|| Error::SplitInfeasible {
        reason: "no retaking of K separates its letters from those of K'".into(),
        long: best_sizes.0,
        short: best_sizes.1,
        bound: (best_sizes.0 + best_sizes.1) as f64 / 3.0,
    })?;
    let converted: Vec<usize> = long_idx[..convert].to_vec();

    let mut k_words = Vec::new();
    for (i, (w, _)) in leaves.iter().enumerate() {
        if leaves[i].1 > lp_max && !converted.contains(&i) {
            k_words.push(Word::from_indices(w.clone()));
        } else {
            k_words.extend(expanded[i].iter().map(|(d, _)| Word::from_indices(d.clone())));
        }
    }
    let kp_words: Vec<Word> = kp_leaves.into_iter().map(|(w, _)| Word::from_indices(w)).collect();
    let k_new = words_to_ifs(k, &k_words);
    let kp_new = words_to_ifs(kp, &kp_words);
    check_window(&k_new, rho, c0, "K")?;
    check_window(&kp_new, rho, c0, "K'")?;
    let split = split_alphabet(&k_new, &kp_new)?;
    Ok(RetakenPair {
        k: k_new,
        k_prime: kp_new,
        k_words,
        k_prime_words: kp_words,
        split,
    })
}

fn retake_self(k: &CantorIfs, rho: f64, c0: f64, s: f64) -> Result<RetakenPair> {
    let leaves = greedy_words(k, s);
    let words: Vec<Word> = leaves.iter().map(|(w, _)| Word::from_indices(w.clone())).collect();
    let direct = words_to_ifs(k, &words);
    let (k_words, k_new, split) = match split_alphabet_self(&direct) {
        Ok(split) => (words, direct, split),
        Err(first_err) => {
            let mut order: Vec<usize> = (0..leaves.len()).collect();
            order.sort_by(|&a, &b| leaves[a].1.total_cmp(&leaves[b].1).then(a.cmp(&b)));
            let mut best: Option<(usize, Vec<Word>, CantorIfs, AlphabetSplit)> = None;
            for convert in 1..=leaves.len() {
                let chosen = &order[..convert];
                let mut ws = Vec::new();
                for (i, (w, _)) in leaves.iter().enumerate() {
                    if chosen.contains(&i) {
                        for a in 0..k.len() {
                            let mut child = w.clone();
                            child.push(a);
                            ws.push(Word::from_indices(child));
                        }
                    } else {
                        ws.push(Word::from_indices(w.clone()));
                    }
                }
                let cand = words_to_ifs(k, &ws);
                if let Ok(split) = split_alphabet_self(&cand) {
                    let score = split.long().len().min(split.short().len());
                    if best.as_ref().is_none_or(|b| score > b.0) {
                        best = Some((score, ws, cand, split));
                    }
                }
            }
            match best {
                Some((_, ws, cand, split)) => (ws, cand, split),
                None => return Err(first_err),
            }
        }
    };
    check_window(&k_new, rho, c0, "K")?;
    Ok(RetakenPair {
        k: k_new.clone(),
        k_prime: k_new,
        k_prime_words: k_words.clone(),
        k_words,
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::Similarity;

    #[test]
    fn middle_thirds_refinement() {
        let k = CantorIfs::middle_thirds();
        let refined = refine_to_scale(&k, 3f64.powi(-8), 2.0).unwrap();
        assert_eq!(refined.len(), 16);
        for m in refined.maps() {
            assert!((m.ratio - 3f64.powi(-4)).abs() < 1e-15);
        }
        assert_eq!(refined.labels()[1], "L.L.L.R");
        assert!(refined.validate().is_ok());
    }

    #[test]
    fn identity_refinement_when_already_in_window() {
        let k = CantorIfs::middle_thirds();
        let refined = refine_to_scale(&k, 1.0 / 9.0, 1.5).unwrap();
        assert_eq!(refined.maps(), k.maps());
    }

    #[test]
    fn mixed_ratios_narrow_window_fails() {
        let ifs = CantorIfs::from_pairs(&[(0.5, 0.0), (0.1, 0.9)]);
        match refine_to_scale(&ifs, 0.01, 1.01) {
            Err(Error::WindowUnreachable { min_c0, .. }) => {
                assert!((min_c0 - 10f64.sqrt()).abs() < 1e-12)
            }
            other => panic!("expected window error, got {other:?}"),
        }
    }

    #[test]
    fn retake_homogeneous_cross_pair() {
        let k = CantorIfs::middle_thirds();
        let pair = retake_pair(&k, &k, 3f64.powi(-6), 10.0, Mode::CrossSum).unwrap();
        assert_eq!(pair.k_prime.len(), 16);
        assert_eq!(pair.k.len(), 14);
        assert_eq!(pair.split.long().len(), 6);
        assert_eq!(pair.split.short().len(), 8);
        assert!(pair.k.validate().is_ok());
        let covered: f64 = pair.k.maps().iter().map(|m| m.ratio.powf(2f64.ln() / 3f64.ln())).sum();
        assert!((covered - 1.0).abs() < 1e-9);
    }

    #[test]
    fn retake_self_pair_splits_halves() {
        let k = CantorIfs::middle_thirds();
        let pair = retake_pair(&k, &k, 3f64.powi(-6), 10.0, Mode::SelfSum).unwrap();
        let n = pair.k.len() as f64;
        assert!(pair.split.long().len() as f64 > n / 3.0);
        assert!(pair.split.short().len() as f64 > n / 3.0);
        assert_eq!(pair.k, pair.k_prime);
    }

    #[test]
    fn retake_window_failure_reports_needed_c0() {
        let k = CantorIfs::from_parts(
            vec!["a".into(), "b".into()],
            vec![Similarity::new(0.45, 0.0), Similarity::new(0.05, 0.9)],
        );
        let err = retake_pair(&k, &CantorIfs::middle_thirds(), 1e-4, 1.5, Mode::CrossSum).unwrap_err();
        assert!(matches!(err, Error::WindowUnreachable { .. } | Error::SplitInfeasible { .. }), "{err}");
    }
}
