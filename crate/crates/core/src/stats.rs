//! Rank-based tests, the two-sample Kolmogorov–Smirnov p-value series and the
//! matched terminal-node panel they are applied to.
//!
//! Signed-rank and rank-sum tests use the exact permutation distribution of
//! the (mid-)rank statistic for small samples and the tie-corrected normal
//! approximation with continuity correction otherwise.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::estimate::{Dataset, PathKey};
use crate::games::{terminal_node, ElicitationForm, ReducedStrategy};
use crate::math;

/// How a p-value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    /// Exact below the size threshold, normal approximation above.
    #[default]
    Auto,
    Exact,
    Normal,
    ChiSquare,
    Kolmogorov,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Sample size the statistic is based on (after dropping zeros).
    pub n: usize,
    pub method: Method,
    /// The sample carries no information (all zero differences, all ties).
    pub degenerate: bool,
}

/// Largest effective sample handled exactly by [`Method::Auto`].
pub const EXACT_SIGNED_RANK_MAX: usize = 25;
pub const EXACT_RANK_SUM_MAX: usize = 40;

/// Mid-ranks (1-based) of `values`, and the tie-group sizes.
pub fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

fn tie_term(ties: &[usize]) -> f64 {
    ties.iter().map(|&t| (t * t * t - t) as f64).sum()
}

/// Friedman test on an `n x k` panel (rows are blocks, columns treatments),
/// with mid-ranks within rows and the tie-corrected statistic.
pub fn friedman(panel: &[Vec<f64>]) -> Result<TestResult> {
    let n = panel.len();
    if n < 2 {
        return Err(invalid!("the Friedman test needs at least 2 rows"));
    }
    let k = panel[0].len();
    if k < 2 || panel.iter().any(|r| r.len() != k) {
        return Err(invalid!("the Friedman test needs at least 2 columns and equal row lengths"));
    }
    let mut col_sums = alloc::vec![0.0; k];
    let mut sum_sq = 0.0;
    for row in panel {
        let (ranks, _) = mid_ranks(row);
        for (c, r) in col_sums.iter_mut().zip(&ranks) {
            *c += r;
            sum_sq += r * r;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let denominator = sum_sq - nf * kf * (kf + 1.0) * (kf + 1.0) / 4.0;
    if denominator <= 1e-12 * sum_sq {
        return Ok(TestResult { statistic: 0.0, p_value: 1.0, n, method: Method::ChiSquare, degenerate: true });
    }
    let centre = nf * (kf + 1.0) / 2.0;
    let spread: f64 = col_sums.iter().map(|r| (r - centre) * (r - centre)).sum();
    let statistic = (kf - 1.0) * spread / denominator;
    Ok(TestResult {
        statistic,
        p_value: math::chi_square_sf(statistic, kf - 1.0).clamp(0.0, 1.0),
        n,
        method: Method::ChiSquare,
        degenerate: false,
    })
}

/// Distribution of the sum of a random subset of `weights` where each item
/// is included independently with probability 1/2. Index = sum.
fn signed_sum_distribution(weights: &[usize]) -> Vec<f64> {
    let total: usize = weights.iter().sum();
    let mut dist = alloc::vec![0.0; total + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for &w in weights {
        for s in (0..=reach).rev() {
            let p = dist[s] * 0.5;
            dist[s] = p;
            dist[s + w] += p;
        }
        reach += w;
    }
    dist
}

fn two_sided_from_distribution(dist: &[f64], observed: usize) -> f64 {
    let lower: f64 = dist[..=observed].iter().sum();
    let upper: f64 = dist[observed..].iter().sum();
    (2.0 * lower.min(upper)).min(1.0)
}

/// Wilcoxon signed-rank test of paired samples; reports `W+`.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<TestResult> {
    wilcoxon_signed_rank_with(x, y, Method::Auto)
}

pub fn wilcoxon_signed_rank_with(x: &[f64], y: &[f64], method: Method) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(invalid!("paired samples have lengths {} and {}", x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(invalid!("the signed-rank test needs at least one pair"));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(TestResult { statistic: 0.0, p_value: 1.0, n, method, degenerate: true });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = mid_ranks(&abs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let exact = match method {
        Method::Exact => true,
        Method::Normal => false,
        _ => n <= EXACT_SIGNED_RANK_MAX,
    };
    if exact {
        // doubled mid-ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| math::round(2.0 * r) as usize).collect();
        let dist = signed_sum_distribution(&doubled);
        let observed = math::round(2.0 * w_plus) as usize;
        return Ok(TestResult {
            statistic: w_plus,
            p_value: two_sided_from_distribution(&dist, observed),
            n,
            method: Method::Exact,
            degenerate: false,
        });
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&ties) / 48.0;
    Ok(normal_result(w_plus, mean, var, n))
}

fn normal_result(statistic: f64, mean: f64, var: f64, n: usize) -> TestResult {
    if var <= 0.0 {
        return TestResult { statistic, p_value: 1.0, n, method: Method::Normal, degenerate: true };
    }
    let z = ((statistic - mean).abs() - 0.5).max(0.0) / math::sqrt(var);
    TestResult {
        statistic,
        p_value: (2.0 * math::normal_sf(z)).min(1.0),
        n,
        method: Method::Normal,
        degenerate: false,
    }
}

/// Mann–Whitney rank-sum test of two independent samples; reports `U` of `x`.
pub fn rank_sum(x: &[f64], y: &[f64]) -> Result<TestResult> {
    rank_sum_with(x, y, Method::Auto)
}

pub fn rank_sum_with(x: &[f64], y: &[f64], method: Method) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(invalid!("the rank-sum test needs two non-empty samples"));
    }
    let (n, m) = (x.len(), y.len());
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = mid_ranks(&pooled);
    let r1: f64 = ranks[..n].iter().sum();
    let u = r1 - (n * (n + 1)) as f64 / 2.0;
    if ties.len() == 1 {
        return Ok(TestResult { statistic: u, p_value: 1.0, n: n + m, method, degenerate: true });
    }
    let exact = match method {
        Method::Exact => true,
        Method::Normal => false,
        _ => n + m <= EXACT_RANK_SUM_MAX,
    };
    if exact {
        let doubled: Vec<usize> = ranks.iter().map(|r| math::round(2.0 * r) as usize).collect();
        let dist = subset_sum_distribution(&doubled, n);
        let observed = math::round(2.0 * r1) as usize;
        return Ok(TestResult {
            statistic: u,
            p_value: two_sided_from_distribution(&dist, observed),
            n: n + m,
            method: Method::Exact,
            degenerate: false,
        });
    }
    let (nf, mf) = (n as f64, m as f64);
    let total = nf + mf;
    let var = nf * mf / 12.0 * ((total + 1.0) - tie_term(&ties) / (total * (total - 1.0)));
    Ok(normal_result(u, nf * mf / 2.0, var, n + m))
}

/// Distribution of the sum over a uniformly random `size`-subset of `weights`.
fn subset_sum_distribution(weights: &[usize], size: usize) -> Vec<f64> {
    let total: usize = weights.iter().sum();
    // ways[c][s]: number of c-subsets of the items seen so far with sum s
    let mut ways = alloc::vec![alloc::vec![0.0f64; total + 1]; size + 1];
    ways[0][0] = 1.0;
    for (seen, &w) in weights.iter().enumerate() {
        for c in (1..=size.min(seen + 1)).rev() {
            let (lower, upper) = ways.split_at_mut(c);
            let from = &lower[c - 1];
            let to = &mut upper[0];
            for s in (0..=total - w).rev() {
                if from[s] != 0.0 {
                    to[s + w] += from[s];
                }
            }
        }
    }
    let count: f64 = ways[size].iter().sum();
    ways.swap_remove(size).into_iter().map(|c| c / count).collect()
}

/// Asymptotic two-sample Kolmogorov–Smirnov p-value for sup-norm `s`
/// between samples of sizes `n` and `m`:
/// `p = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2)`, `x = sqrt(nm/(n+m)) s`.
/// For small `x` the equivalent theta-function form is summed instead.
pub fn ks_two_sample_pvalue(s: f64, n: usize, m: usize) -> f64 {
    if n == 0 || m == 0 {
        return 1.0;
    }
    let s = s.clamp(0.0, 1.0);
    let effective = (n * m) as f64 / (n + m) as f64;
    let x = math::sqrt(effective) * s;
    let p = if x < 1.18 {
        if x <= 0.0 {
            return 1.0;
        }
        let c = core::f64::consts::PI * core::f64::consts::PI / (8.0 * x * x);
        let mut sum = 0.0;
        let mut j = 1.0f64;
        loop {
            let term = math::exp(-(2.0 * j - 1.0) * (2.0 * j - 1.0) * c);
            sum += term;
            if term < 1e-16 {
                break;
            }
            j += 1.0;
        }
        1.0 - math::sqrt(2.0 * core::f64::consts::PI) / x * sum
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        let mut j = 1.0f64;
        loop {
            let term = math::exp(-2.0 * j * j * x * x);
            sum += sign * term;
            if term < 1e-12 {
                break;
            }
            sign = -sign;
            j += 1.0;
        }
        2.0 * sum
    };
    p.clamp(0.0, 1.0)
}

/// Sup-norm distance between the empirical CDFs of two samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = a.iter().chain(b).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let cdf = |sample: &[f64], t: f64| sample.iter().filter(|v| **v <= t).count() as f64 / sample.len() as f64;
    xs.iter().map(|&t| (cdf(a, t) - cdf(b, t)).abs()).fold(0.0, f64::max)
}

/// Two-sample KS test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid!("the KS test needs two non-empty samples"));
    }
    let s = ks_statistic(a, b);
    Ok(TestResult {
        statistic: s,
        p_value: ks_two_sample_pvalue(s, a.len(), b.len()),
        n: a.len() + b.len(),
        method: Method::Kolmogorov,
        degenerate: false,
    })
}

/// Bonferroni adjustment `min(1, comparisons * p)`.
pub fn bonferroni(p: f64, comparisons: usize) -> f64 {
    (p * comparisons.max(1) as f64).min(1.0)
}

/// Terminal nodes of one pair in one game under each form.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchedRow {
    pub session_id: String,
    pub pair_id: String,
    pub game_id: String,
    /// Direct response, reduced strategy, full strategy.
    pub cells: [usize; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchedPanel {
    pub rows: Vec<MatchedRow>,
    /// Pair-games missing some form or role.
    pub skipped: usize,
}

impl MatchedPanel {
    pub const FORMS: [ElicitationForm; 3] = [
        ElicitationForm::DirectResponse,
        ElicitationForm::ReducedStrategy,
        ElicitationForm::FullStrategy,
    ];

    /// Terminal nodes of one form, optionally restricted to a game.
    pub fn column(&self, form: ElicitationForm, game_id: Option<&str>) -> Vec<f64> {
        let c = Self::FORMS.iter().position(|f| *f == form).expect("all forms are columns");
        self.rows
            .iter()
            .filter(|r| game_id.is_none_or(|g| r.game_id == g))
            .map(|r| r.cells[c] as f64)
            .collect()
    }

    /// Rows of one game as an `n x 3` matrix.
    pub fn matrix(&self, game_id: Option<&str>) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .filter(|r| game_id.is_none_or(|g| r.game_id == g))
            .map(|r| r.cells.iter().map(|&c| c as f64).collect())
            .collect()
    }

    pub fn game_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.rows.iter().map(|r| r.game_id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

/// Builds the matched panel: the direct-response cell is the observed path's
/// terminal node, the strategy cells are the terminal node the two submitted
/// strategies of the same pair would reach. Rows are sorted by
/// `(session, pair, game)`.
pub fn matched_terminal_nodes(data: &Dataset) -> Result<MatchedPanel> {
    let mut cells: BTreeMap<PathKey, [Option<usize>; 3]> = BTreeMap::new();
    for path in data.paths()? {
        cells.entry(path.key).or_default()[0] = Some(path.terminal);
    }
    let mut strategies: BTreeMap<(PathKey, usize), [Option<ReducedStrategy>; 2]> = BTreeMap::new();
    for (i, obs) in data.observations.iter().enumerate() {
        let column = match obs.form {
            ElicitationForm::DirectResponse => continue,
            ElicitationForm::ReducedStrategy => 1,
            ElicitationForm::FullStrategy => 2,
        };
        let depth = data.game(&obs.game_id)?.depth();
        let reduced = ReducedStrategy::from_index(data.reduced_choice(i)?, depth)?;
        let key = obs.path_key();
        cells.entry(key.clone()).or_default();
        strategies.entry((key, column)).or_default()[obs.role.index()] = Some(reduced);
    }
    for ((key, column), pair) in strategies {
        if let [Some(s1), Some(s2)] = pair {
            let depth = data.game(&key.game_id)?.depth();
            cells.get_mut(&key).expect("inserted above")[column] = Some(terminal_node(s1, s2, depth));
        }
    }
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (key, c) in cells {
        match c {
            [Some(a), Some(b), Some(d)] => rows.push(MatchedRow {
                session_id: key.session_id,
                pair_id: key.pair_id,
                game_id: key.game_id,
                cells: [a, b, d],
            }),
            _ => skipped += 1,
        }
    }
    Ok(MatchedPanel { rows, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Enumerates all 2^n sign assignments of the observed mid-ranks.
    fn exact_signed_rank_oracle(x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
        let (ranks, _) = mid_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let w: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
        let total = 1usize << d.len();
        let (mut le, mut ge) = (0usize, 0usize);
        for mask in 0..total {
            let s: f64 = (0..d.len()).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if s <= w + 1e-9 {
                le += 1;
            }
            if s >= w - 1e-9 {
                ge += 1;
            }
        }
        (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
    }

    // Enumerates all ways to assign n of the pooled mid-ranks to x.
    fn exact_rank_sum_oracle(x: &[f64], y: &[f64]) -> f64 {
        let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
        let (ranks, _) = mid_ranks(&pooled);
        let observed: f64 = ranks[..x.len()].iter().sum();
        let big = pooled.len();
        let (mut le, mut ge, mut total) = (0usize, 0usize, 0usize);
        for mask in 0usize..(1 << big) {
            if mask.count_ones() as usize != x.len() {
                continue;
            }
            total += 1;
            let s: f64 = (0..big).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if s <= observed + 1e-9 {
                le += 1;
            }
            if s >= observed - 1e-9 {
                ge += 1;
            }
        }
        (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
    }

    #[test]
    fn mid_ranks_average_ties() {
        let (r, t) = mid_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, [3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, [1, 1, 2]);
    }

    #[test]
    fn friedman_cases() {
        let same = alloc::vec![alloc::vec![1.0, 1.0, 1.0]; 5];
        let r = friedman(&same).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let ordered: Vec<Vec<f64>> = (0..10).map(|i| alloc::vec![i as f64, i as f64 + 1.0, i as f64 + 5.0]).collect();
        let r = friedman(&ordered).unwrap();
        assert!((r.statistic - 20.0).abs() < 1e-12 && r.p_value < 0.001);
        // 3 x 3 with ties: row ranks (1,2,3), (1.5,1.5,3), (2,1,3)
        // R = (4.5, 4.5, 9); sum r^2 = 14 + 13.5 + 14 = 41.5
        // Q = 2 * (2.25 + 2.25 + 9) / (41.5 - 36) = 27 / 5.5
        let panel = alloc::vec![
            alloc::vec![1.0, 2.0, 3.0],
            alloc::vec![4.0, 4.0, 7.0],
            alloc::vec![6.0, 5.0, 9.0],
        ];
        assert_eq!(friedman(&panel).unwrap().statistic, 27.0 / 5.5);
        assert!(friedman(&panel[..1]).is_err());
    }

    #[test]
    fn signed_rank_cases() {
        let x = [1.0, 2.0, 3.0];
        let r = wilcoxon_signed_rank(&x, &x).unwrap();
        assert!(r.degenerate && r.p_value == 1.0);
        let d = [1.0, -1.0, 2.5, -2.5, 4.0, -4.0];
        let zeros = [0.0; 6];
        let r = wilcoxon_signed_rank(&d, &zeros).unwrap();
        assert_eq!(r.statistic, 10.5);
        assert!(r.p_value > 0.99);
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn twenty_pairs_against_enumeration() {
        let x: Vec<f64> = (0..20).map(|i| ((i * 37) % 11) as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| ((i * 53) % 7) as f64 + 1.0).collect();
        let exact = exact_signed_rank_oracle(&x, &y);
        let got = wilcoxon_signed_rank(&x, &y).unwrap().p_value;
        assert!((got - exact).abs() < 1e-12);
        let normal = wilcoxon_signed_rank_with(&x, &y, Method::Normal).unwrap().p_value;
        assert!((normal - exact).abs() < 0.01, "{normal} vs {exact}");
    }

    #[test]
    fn rank_sum_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!(rank_sum(&x, &x).unwrap().p_value > 0.99);
        let lo: Vec<f64> = (0..10).map(f64::from).collect();
        let hi: Vec<f64> = (10..20).map(f64::from).collect();
        let r = rank_sum(&lo, &hi).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.p_value < 0.001);
        assert!(rank_sum(&[], &x).is_err());
        let r = rank_sum(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!(r.degenerate && r.p_value == 1.0);
    }

    #[test]
    fn ks_series_values() {
        let cases = [(0.128, 0.413), (0.251, 0.005), (0.188, 0.068), (0.072, 0.966), (0.460, 0.0)];
        for (s, p) in cases {
            let got = ks_two_sample_pvalue(s, 96, 96);
            assert!((got - p).abs() < 0.005, "{s}: {got}");
        }
        assert!(ks_two_sample_pvalue(1.0, 1000, 1000) < 1e-12);
        assert_eq!(ks_two_sample_pvalue(0.0, 96, 96), 1.0);
        // both branches agree where they meet
        let x = 1.18 / 48f64.sqrt();
        let a = ks_two_sample_pvalue(x * (1.0 - 1e-12), 96, 96);
        let b = ks_two_sample_pvalue(x, 96, 96);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn bonferroni_cases() {
        assert_eq!(bonferroni(0.4, 3), 1.0);
        assert!((bonferroni(0.01, 3) - 0.03).abs() < 1e-15);
        assert_eq!(bonferroni(0.2, 1), 0.2);
    }

    #[test]
    fn ks_statistic_of_samples() {
        assert_eq!(ks_statistic(&[1.0, 1.0], &[7.0, 7.0]), 1.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[2.0, 1.0]), 0.0);
    }

    proptest! {
        #[test]
        fn signed_rank_matches_enumeration(
            x in proptest::collection::vec(0u8..6, 1..=12),
            y_seed in proptest::collection::vec(0u8..6, 12),
        ) {
            let xs: Vec<f64> = x.iter().map(|v| *v as f64).collect();
            let ys: Vec<f64> = y_seed[..xs.len()].iter().map(|v| *v as f64).collect();
            let r = wilcoxon_signed_rank(&xs, &ys).unwrap();
            if !r.degenerate {
                prop_assert!((r.p_value - exact_signed_rank_oracle(&xs, &ys)).abs() < 0.01);
            }
        }

        #[test]
        fn rank_sum_matches_enumeration(
            x in proptest::collection::vec(0u8..8, 1..=6),
            y in proptest::collection::vec(0u8..8, 1..=6),
        ) {
            let xs: Vec<f64> = x.iter().map(|v| *v as f64).collect();
            let ys: Vec<f64> = y.iter().map(|v| *v as f64).collect();
            let r = rank_sum(&xs, &ys).unwrap();
            if !r.degenerate {
                prop_assert!((r.p_value - exact_rank_sum_oracle(&xs, &ys)).abs() < 0.01);
            }
        }

        #[test]
        fn rank_tests_ignore_monotone_transforms(
            x in proptest::collection::vec(-5i8..5, 3..10),
            y in proptest::collection::vec(-5i8..5, 3..10),
        ) {
            let n = x.len().min(y.len());
            let xs: Vec<f64> = x[..n].iter().map(|v| *v as f64).collect();
            let ys: Vec<f64> = y[..n].iter().map(|v| *v as f64).collect();
            let cube = |v: &[f64]| v.iter().map(|a| a * a * a).collect::<Vec<_>>();
            prop_assert_eq!(rank_sum(&xs, &ys).unwrap(), rank_sum(&cube(&xs), &cube(&ys)).unwrap());
            let panel: Vec<Vec<f64>> = xs.iter().zip(&ys).map(|(a, b)| alloc::vec![*a, *b, a + b]).collect();
            let cubed: Vec<Vec<f64>> = panel.iter().map(|r| cube(r)).collect();
            if panel.len() >= 2 {
                let (a, b) = (friedman(&panel).unwrap(), friedman(&cubed).unwrap());
                prop_assert!((a.statistic - b.statistic).abs() < 1e-12);
            }
        }

        #[test]
        fn ks_pvalue_decreases_in_s(a in 0.0f64..1.0, b in 0.0f64..1.0, n in 1usize..300, m in 1usize..300) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (p_lo, p_hi) = (ks_two_sample_pvalue(lo, n, m), ks_two_sample_pvalue(hi, n, m));
            prop_assert!(p_hi <= p_lo + 1e-12);
            prop_assert!((0.0..=1.0).contains(&p_lo));
        }
    }
}
