//! Public-API round trips: simulate, fit and test on the same data.

use centipede_core::estimate::{fit, Problem, SearchConfig};
use centipede_core::predict::{form_supnorm, terminal_distribution, Model};
use centipede_core::simulate::{simulate, SimConfig};
use centipede_core::solvers::solve;
use centipede_core::stats::{friedman, ks_two_sample, matched_terminal_nodes};
use centipede_core::*;

fn lab_games() -> Vec<(String, CentipedeGame)> {
    [
        ("linear-0.8", GameSpec::linear(0.8, 6)),
        ("exp-2.5", GameSpec::exponential(2.5, 2.0, 6)),
        ("const-0.4", GameSpec::constant(0.4, 6)),
    ]
    .into_iter()
    .map(|(id, spec)| (id.to_owned(), CentipedeGame::new(spec.with_lab_rescale()).unwrap()))
    .collect()
}

const FORMS: [ElicitationForm; 3] =
    [ElicitationForm::DirectResponse, ElicitationForm::ReducedStrategy, ElicitationForm::FullStrategy];

#[test]
fn dch_fit_recovers_simulated_tau() {
    let prior = LevelPrior::poisson(1.8, 10).unwrap();
    let cfg = SimConfig::new(lab_games(), FORMS.to_vec(), Model::Dch { prior }, 600, 21);
    let sim = simulate(&cfg).unwrap();
    let problem = Problem::new(SolutionKind::Dch, &sim.data, 10, &SolverConfig::default()).unwrap();
    let fitted = fit(&problem, &SearchConfig::default()).unwrap();
    let tau = fitted.tau.unwrap();
    assert!((tau - 1.8).abs() < 0.3, "tau-hat {tau}");
    assert!(!fitted.at_boundary);
}

#[test]
fn simulated_panel_matches_predicted_form_gap() {
    let games = lab_games();
    let prior = LevelPrior::poisson(1.25, 10).unwrap();
    let model = Model::Dch { prior: prior.clone() };
    let n = 2000;
    let cfg = SimConfig::new(games.clone(), FORMS.to_vec(), model.clone(), n, 5);
    let panel = matched_terminal_nodes(&sim_data(&cfg)).unwrap();
    assert_eq!(panel.rows.len(), n * games.len());

    let solver = SolverConfig::default();
    for (id, game) in &games {
        let predicted = form_supnorm(game, &model, [ElicitationForm::ReducedStrategy, ElicitationForm::DirectResponse], &solver)
            .unwrap();
        let dr = panel.column(ElicitationForm::DirectResponse, Some(id));
        let rs = panel.column(ElicitationForm::ReducedStrategy, Some(id));
        let fs = panel.column(ElicitationForm::FullStrategy, Some(id));
        let observed = ks_two_sample(&rs, &dr).unwrap().statistic;
        assert!((observed - predicted).abs() < 0.06, "{id}: KS {observed} vs predicted {predicted}");
        // FS and DR share one terminal distribution under DCH
        assert!(ks_two_sample(&fs, &dr).unwrap().statistic < 0.06, "{id}");

        let sol = solve(SolutionKind::Dch, game, ElicitationForm::DirectResponse, Some(&prior), None, &solver).unwrap();
        let dist = terminal_distribution(game, ElicitationForm::DirectResponse, &sol, Some(&prior)).unwrap();
        assert_eq!(dist.nodes(), game.stages() + 1);
    }

    let rows = panel.matrix(None);
    let result = friedman(&rows).unwrap();
    assert!((0.0..=1.0).contains(&result.p_value));
}

fn sim_data(cfg: &SimConfig) -> estimate::Dataset {
    simulate(cfg).unwrap().data
}
