//! Frozen-facet prediction near the right boundary: the periodic L/R words
//! of the vertical facets separating the turning points, their projection
//! angles, and the per-slice letter sequences used to validate predictions
//! against samples.
//!
//! Facet `j` lies below the `j`-th turning point; moving one slice further
//! from the boundary adds a particle above the facet exactly when the
//! slice's residue class belongs to one of the `j` beta classes already
//! "passed", and those slices read `R` in a horizontal cross-section. Facet
//! `j`'s word therefore has `R` exactly at the residues of classes
//! `1..=j`, so its `R`-count per period is `m_1 + ... + m_j`; merged
//! classes (`m > 1`) flip several letters at one turning point, which is
//! how the degenerate case loses facets.

use serde::Serialize;

use crate::asymptotics::LimitSpec;
use crate::Result;

/// One frozen facet's horizontal profile.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FacetWord {
    /// 0 = top facet (all `L`), `l` = bottom facet (all `R`).
    pub index: usize,
    /// Projection angle of the facet, `(R count) * pi / (2k)`.
    pub angle: f64,
    /// One period in canonical (lexicographically smallest) rotation.
    pub period_word: String,
    /// Transient letters before the canonical alignment starts at the
    /// boundary.
    pub prefix: String,
}

fn letter(l: &LimitSpec, facet: usize, t_hat: i64) -> char {
    if l.beta().class_of_residue(t_hat - 1) < facet {
        'R'
    } else {
        'L'
    }
}

/// The anchored letter sequence of facet `facet` for slices
/// `t_hat = 1..=count` (distance from the boundary).
pub fn anchored_letters(l: &LimitSpec, facet: usize, count: usize) -> String {
    (1..=count as i64).map(|t| letter(l, facet, t)).collect()
}

fn lex_min_rotation(word: &str) -> (String, usize) {
    let bytes = word.as_bytes();
    let k = bytes.len();
    let mut best = 0usize;
    for s in 1..k {
        for i in 0..k {
            let a = bytes[(s + i) % k];
            let b = bytes[(best + i) % k];
            if a != b {
                if a < b {
                    best = s;
                }
                break;
            }
        }
    }
    let rotated: String = (0..k).map(|i| bytes[(best + i) % k] as char).collect();
    (rotated, best)
}

/// Predicted facet words, top to bottom (`l + 1` of them). Handles merged
/// betas: the word list simply skips the intermediate `R`-counts.
pub fn facet_words(l: &LimitSpec) -> Vec<FacetWord> {
    let k = l.k();
    let n_classes = l.beta().l();
    let mut out = Vec::with_capacity(n_classes + 1);
    let mut r_count = 0usize;
    for facet in 0..=n_classes {
        if facet > 0 {
            r_count += l.beta().mults()[facet - 1];
        }
        let anchored = anchored_letters(l, facet, k);
        let (period_word, offset) = lex_min_rotation(&anchored);
        // the anchored sequence is purely periodic; the prefix is the
        // initial stretch before the canonical rotation starts
        let prefix = anchored[..offset].to_string();
        out.push(FacetWord {
            index: facet,
            angle: r_count as f64 * std::f64::consts::PI / (2.0 * k as f64),
            period_word,
            prefix,
        });
    }
    out
}

/// JSON for the CLI: the full facet list of a limit spec.
pub fn facets_json(l: &LimitSpec) -> Result<String> {
    serde_json::to_string_pretty(&facet_words(l))
        .map_err(|e| crate::error::Error::Parse(format!("facet serialization: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(l: &LimitSpec) -> Vec<String> {
        facet_words(l).iter().map(|f| f.period_word.clone()).collect()
    }

    #[test]
    fn k4_straight_order() {
        // betas (1/8, 1/4, 1/2, 1): adjacent classes, straight profile list.
        let l = LimitSpec::new(4, vec![2.0, 2.0, 2.0, 0.125], 1.0, 0).unwrap();
        assert_eq!(
            words(&l),
            vec!["LLLL", "LLLR", "LLRR", "LRRR", "RRRR"]
        );
    }

    #[test]
    fn k4_alternating_order() {
        // betas (1/8, 1/2, 1/4, 1): the two smallest sit at alternating
        // residues, so the middle facet alternates.
        let l = LimitSpec::new(4, vec![4.0, 0.5, 4.0, 0.125], 1.0, 0).unwrap();
        assert_eq!(
            words(&l),
            vec!["LLLL", "LLLR", "LRLR", "LRRR", "RRRR"]
        );
    }

    #[test]
    fn k1_has_top_and_bottom_only() {
        let l = LimitSpec::new(1, vec![1.0], 1.0, 0).unwrap();
        assert_eq!(words(&l), vec!["L", "R"]);
    }

    #[test]
    fn degenerate_smallest_pair_drops_single_r_facet() {
        // betas (0.2, 0.4, 0.2, 1): the smallest beta has multiplicity 2,
        // so the top two turning points merge and no 1-R facet exists.
        let l = LimitSpec::new(4, vec![5.0, 0.5, 2.0, 0.2], 1.0, 0).unwrap();
        assert_eq!(l.beta().mults(), &[2, 1, 1]);
        let ws = words(&l);
        assert_eq!(ws, vec!["LLLL", "LRLR", "LRRR", "RRRR"]);
        assert!(ws.iter().all(|w| w != "LLLR"));
    }

    #[test]
    fn all_equal_betas_leave_two_facets() {
        let l = LimitSpec::new(4, vec![1.0, 1.0, 1.0, 1.0], 1.0, 0).unwrap();
        assert_eq!(words(&l), vec!["LLLL", "RRRR"]);
    }

    #[test]
    fn k3_distinct_flip_rule_by_hand() {
        // alphas (2, 3, 1/6), d = 0 mod 3: betas (1/6, 1/2, 1).
        // Residues: n=0 -> beta_3=1 (class 2), n=1 -> 1/6 (class 0),
        // n=2 -> 1/2 (class 1). Hand-simulated flips:
        // facet1: R at n=1 -> anchored "LRL"; facet2: R at n in {1,2} -> "LRR".
        let l = LimitSpec::new(3, vec![2.0, 3.0, 1.0 / 6.0], 1.0, 0).unwrap();
        assert_eq!(anchored_letters(&l, 1, 6), "LRLLRL");
        assert_eq!(anchored_letters(&l, 2, 6), "LRRLRR");
        assert_eq!(
            words(&l),
            vec!["LLL", "LLR", "LRR", "RRR"]
        );
    }

    #[test]
    fn r_counts_increase_by_multiplicity() {
        let l = LimitSpec::new(4, vec![5.0, 0.5, 2.0, 0.2], 1.0, 0).unwrap();
        let fs = facet_words(&l);
        let counts: Vec<usize> = fs
            .iter()
            .map(|f| f.period_word.chars().filter(|&c| c == 'R').count())
            .collect();
        assert_eq!(counts, vec![0, 2, 3, 4]);
        // angles follow the R-count
        for f in &fs {
            let r = f.period_word.chars().filter(|&c| c == 'R').count();
            assert!((f.angle - r as f64 * std::f64::consts::PI / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn anchored_matches_prefix_plus_period() {
        let l = LimitSpec::new(4, vec![4.0, 0.5, 4.0, 0.125], 1.0, 0).unwrap();
        for f in facet_words(&l) {
            let anchored = anchored_letters(&l, f.index, 4 * 3 + f.prefix.len());
            let mut rebuilt = f.prefix.clone();
            while rebuilt.len() < anchored.len() {
                rebuilt.push_str(&f.period_word);
            }
            assert_eq!(&rebuilt[..anchored.len()], anchored);
        }
    }
}
