//! Batch driver for the matched-panel tests: per game and pooled, Friedman
//! across the three forms and pairwise signed-rank, rank-sum and KS tests
//! with a Bonferroni adjustment over the three pairs.

use std::str::FromStr;

use centipede_core::stats::{
    bonferroni, friedman, ks_two_sample, rank_sum, wilcoxon_signed_rank, MatchedPanel, Method, TestResult,
};
use centipede_core::ElicitationForm;

use crate::error::{AppError, AppResult};
use crate::report::TestRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestKind {
    Friedman,
    SignedRank,
    RankSum,
    Ks,
}

impl TestKind {
    pub const ALL: [TestKind; 4] = [TestKind::Friedman, TestKind::SignedRank, TestKind::RankSum, TestKind::Ks];

    pub fn code(self) -> &'static str {
        match self {
            TestKind::Friedman => "friedman",
            TestKind::SignedRank => "signedrank",
            TestKind::RankSum => "ranksum",
            TestKind::Ks => "ks",
        }
    }
}

impl FromStr for TestKind {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        TestKind::ALL
            .into_iter()
            .find(|t| t.code() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| AppError::validation(format!("unknown test '{s}' (expected friedman, signedrank, ranksum or ks)")))
    }
}

/// Form pairs compared by the two-sample tests.
pub const PAIRS: [(ElicitationForm, ElicitationForm); 3] = [
    (ElicitationForm::DirectResponse, ElicitationForm::ReducedStrategy),
    (ElicitationForm::DirectResponse, ElicitationForm::FullStrategy),
    (ElicitationForm::ReducedStrategy, ElicitationForm::FullStrategy),
];

fn method_code(m: Method) -> &'static str {
    match m {
        Method::Auto => "auto",
        Method::Exact => "exact",
        Method::Normal => "normal",
        Method::ChiSquare => "chi-square",
        Method::Kolmogorov => "kolmogorov",
    }
}

fn row(test: TestKind, game: &str, forms: String, r: TestResult, adjust: Option<usize>) -> TestRow {
    TestRow {
        test: test.code().to_string(),
        game: game.to_string(),
        forms,
        statistic: r.statistic,
        p: r.p_value,
        p_adjusted: adjust.map(|k| bonferroni(r.p_value, k)),
        n: r.n,
        method: method_code(r.method).to_string(),
        degenerate: r.degenerate,
    }
}

/// Runs the requested tests on every game of the panel and on the pooled
/// panel, in that order. Scopes with fewer than two rows are skipped.
pub fn run_tests(panel: &MatchedPanel, tests: &[TestKind]) -> AppResult<Vec<TestRow>> {
    let mut scopes: Vec<Option<String>> = panel.game_ids().into_iter().map(Some).collect();
    scopes.push(None);
    let mut rows = Vec::new();
    for scope in &scopes {
        let name = scope.as_deref().unwrap_or("pooled");
        let matrix = panel.matrix(scope.as_deref());
        if matrix.len() < 2 {
            log::warn!("skipping {name}: {} matched rows", matrix.len());
            continue;
        }
        for &test in tests {
            if test == TestKind::Friedman {
                rows.push(row(test, name, "dr-rs-fs".into(), friedman(&matrix)?, None));
                continue;
            }
            for (a, b) in PAIRS {
                let x = panel.column(a, scope.as_deref());
                let y = panel.column(b, scope.as_deref());
                let result = match test {
                    TestKind::SignedRank => wilcoxon_signed_rank(&x, &y)?,
                    TestKind::RankSum => rank_sum(&x, &y)?,
                    _ => ks_two_sample(&x, &y)?,
                };
                rows.push(row(test, name, format!("{a}-{b}"), result, Some(PAIRS.len())));
            }
        }
    }
    Ok(rows)
}

/// Parses a comma-separated test list.
pub fn parse_tests(list: &str) -> AppResult<Vec<TestKind>> {
    let tests: AppResult<Vec<TestKind>> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect();
    let tests = tests?;
    if tests.is_empty() {
        return Err(AppError::validation("no tests requested"));
    }
    Ok(tests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use centipede_core::stats::MatchedRow;

    fn panel(cells: &[[usize; 3]]) -> MatchedPanel {
        MatchedPanel {
            rows: cells
                .iter()
                .enumerate()
                .map(|(i, c)| MatchedRow {
                    session_id: "s".into(),
                    pair_id: i.to_string(),
                    game_id: "g".into(),
                    cells: *c,
                })
                .collect(),
            skipped: 0,
        }
    }

    #[test]
    fn identical_columns_give_friedman_p_one() {
        let p = panel(&[[3, 3, 3], [5, 5, 5], [2, 2, 2]]);
        let rows = run_tests(&p, &TestKind::ALL).unwrap();
        // one game plus pooled, each 1 Friedman + 3 x 3 pairwise
        assert_eq!(rows.len(), 20);
        let f = rows.iter().find(|r| r.test == "friedman").unwrap();
        assert_eq!((f.statistic, f.p), (0.0, 1.0));
        assert!(rows.iter().all(|r| r.p == 1.0));
    }

    #[test]
    fn parses_test_lists() {
        assert_eq!(parse_tests("friedman, ks").unwrap(), [TestKind::Friedman, TestKind::Ks]);
        assert!(parse_tests("anova").is_err());
        assert!(parse_tests("").is_err());
    }
}
