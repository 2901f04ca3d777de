//! Centipede game construction, elicitation forms and strategy encodings.
//!
//! Nodes are numbered from 1. Player One moves at odd nodes and Player Two at
//! even nodes; a game with depth `D` has `2D` decision nodes and node `2D + 1`
//! is the terminal reached when nobody takes.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    /// 0 for Player One, 1 for Player Two.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    #[inline]
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    /// Role number as used in data files (1 or 2).
    pub fn role(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_role(role: u8) -> Result<Player> {
        match role {
            1 => Ok(Player::One),
            2 => Ok(Player::Two),
            _ => Err(invalid!("role must be 1 or 2, got {role}")),
        }
    }

    /// The player who moves at decision node `node`.
    #[inline]
    pub fn mover(node: usize) -> Player {
        if node % 2 == 1 {
            Player::One
        } else {
            Player::Two
        }
    }

    /// Node of this player's `i`-th decision (1-based).
    #[inline]
    pub fn own_node(self, i: usize) -> usize {
        2 * i - 1 + self.index()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Family {
    Linear,
    Exponential,
    Constant,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Linear => "linear",
            Family::Exponential => "exponential",
            Family::Constant => "constant",
            Family::Custom => "custom",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Family::Linear),
            "exponential" | "exp" => Ok(Family::Exponential),
            "constant" | "const" => Ok(Family::Constant),
            "custom" => Ok(Family::Custom),
            _ => Err(invalid!("unknown game family '{s}'")),
        }
    }
}

/// Positive affine payoff transform `a * x + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rescale {
    pub a: f64,
    pub b: f64,
}

impl Rescale {
    pub const IDENTITY: Rescale = Rescale { a: 1.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Result<Rescale> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(invalid!("rescale needs a > 0 and finite b, got a={a}, b={b}"));
        }
        Ok(Rescale { a, b })
    }

    pub fn scale(a: f64) -> Result<Rescale> {
        Rescale::new(a, 0.0)
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

impl Default for Rescale {
    fn default() -> Self {
        Rescale::IDENTITY
    }
}

/// Parameters of a centipede game before construction.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    pub family: Family,
    /// Increment (linear), ratio (exponential) or decay factor (constant).
    pub c: f64,
    /// Payoff multiplier of the exponential family.
    pub pi: f64,
    /// Number of decision nodes, `2D`.
    pub stages: usize,
    pub rescale: Rescale,
    /// Explicit `(X_j, Y_j)` table, only read for [`Family::Custom`].
    pub payoffs: Vec<[f64; 2]>,
}

impl GameSpec {
    pub const DEFAULT_PI: f64 = 2.0;

    fn family_spec(family: Family, c: f64, stages: usize) -> GameSpec {
        GameSpec {
            family,
            c,
            pi: GameSpec::DEFAULT_PI,
            stages,
            rescale: Rescale::IDENTITY,
            payoffs: Vec::new(),
        }
    }

    pub fn linear(c: f64, stages: usize) -> GameSpec {
        GameSpec::family_spec(Family::Linear, c, stages)
    }

    pub fn exponential(c: f64, pi: f64, stages: usize) -> GameSpec {
        GameSpec {
            pi,
            ..GameSpec::family_spec(Family::Exponential, c, stages)
        }
    }

    pub fn constant(c: f64, stages: usize) -> GameSpec {
        GameSpec::family_spec(Family::Constant, c, stages)
    }

    pub fn custom(payoffs: Vec<[f64; 2]>) -> GameSpec {
        GameSpec {
            family: Family::Custom,
            c: f64::NAN,
            pi: f64::NAN,
            stages: payoffs.len().saturating_sub(1),
            rescale: Rescale::IDENTITY,
            payoffs,
        }
    }

    pub fn with_rescale(mut self, rescale: Rescale) -> GameSpec {
        self.rescale = rescale;
        self
    }

    /// The rescaling used for each family in the six-game laboratory design:
    /// `100x + 50` for linear, `x4` for exponential and `x250` for constant games.
    pub fn with_lab_rescale(self) -> GameSpec {
        let rescale = match self.family {
            Family::Linear => Rescale { a: 100.0, b: 50.0 },
            Family::Exponential => Rescale { a: 4.0, b: 0.0 },
            Family::Constant => Rescale { a: 250.0, b: 0.0 },
            Family::Custom => Rescale::IDENTITY,
        };
        self.with_rescale(rescale)
    }

    /// Checks the family-specific parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if self.stages < 4 || !self.stages.is_multiple_of(2) {
            return Err(invalid!(
                "stages must be even and at least 4, got {}",
                self.stages
            ));
        }
        Rescale::new(self.rescale.a, self.rescale.b)?;
        let c = self.c;
        match self.family {
            Family::Linear | Family::Constant => {
                if !(c > 0.0 && c < 1.0) {
                    return Err(invalid!(
                        "{} family requires 0 < c < 1, got c = {c}",
                        self.family
                    ));
                }
            }
            Family::Exponential => {
                if !(c > 1.0) {
                    return Err(invalid!("exponential family requires c > 1, got c = {c}"));
                }
                if !(self.pi > 1.0 && self.pi < c) {
                    return Err(invalid!(
                        "exponential family requires 1 < pi < c, got pi = {}, c = {c}",
                        self.pi
                    ));
                }
            }
            Family::Custom => {
                if self.payoffs.len() != self.stages + 1 {
                    return Err(invalid!(
                        "custom payoff table needs {} rows, got {}",
                        self.stages + 1,
                        self.payoffs.len()
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A fully specified centipede game: payoff pairs for nodes `1..=2D+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CentipedeGame {
    payoffs: Vec<[f64; 2]>,
    spec: GameSpec,
}

impl CentipedeGame {
    /// Builds the payoff table from the family closed form, then rescales it.
    pub fn new(spec: GameSpec) -> Result<CentipedeGame> {
        spec.validate()?;
        let n = spec.stages + 1;
        let raw: Vec<[f64; 2]> = match spec.family {
            Family::Custom => spec.payoffs.clone(),
            family => (1..=n)
                .map(|j| {
                    let (large, small) = family_payoff(family, spec.c, spec.pi, j);
                    if j % 2 == 1 {
                        [large, small]
                    } else {
                        [small, large]
                    }
                })
                .collect(),
        };
        let payoffs: Vec<[f64; 2]> = raw
            .iter()
            .map(|&[x, y]| [spec.rescale.apply(x), spec.rescale.apply(y)])
            .collect();
        check_payoffs(&payoffs)?;
        Ok(CentipedeGame { payoffs, spec })
    }

    /// Builds a game directly from an explicit payoff table.
    pub fn from_payoffs(payoffs: Vec<[f64; 2]>) -> Result<CentipedeGame> {
        CentipedeGame::new(GameSpec::custom(payoffs))
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    /// Number of decisions per player, `D`.
    #[inline]
    pub fn depth(&self) -> usize {
        self.payoffs.len() / 2
    }

    /// Number of decision nodes, `2D`.
    #[inline]
    pub fn stages(&self) -> usize {
        self.payoffs.len() - 1
    }

    /// Number of terminal nodes, `2D + 1`.
    #[inline]
    pub fn terminal_count(&self) -> usize {
        self.payoffs.len()
    }

    /// Payoff of `player` when the game ends at `node` (1-based).
    #[inline]
    pub fn payoff(&self, node: usize, player: Player) -> f64 {
        self.payoffs[node - 1][player.index()]
    }

    pub fn payoffs(&self) -> &[[f64; 2]] {
        &self.payoffs
    }

    /// Smallest and largest payoff appearing anywhere in the table.
    pub fn payoff_range(&self) -> (f64, f64) {
        self.payoffs
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Same game with every payoff passed through `rescale`.
    pub fn rescaled(&self, rescale: Rescale) -> Result<CentipedeGame> {
        Rescale::new(rescale.a, rescale.b)?;
        let payoffs = self
            .payoffs
            .iter()
            .map(|&[x, y]| [rescale.apply(x), rescale.apply(y)])
            .collect();
        let mut spec = GameSpec::custom(payoffs);
        spec.stages = self.stages();
        CentipedeGame::new(spec)
    }
}

fn family_payoff(family: Family, c: f64, pi: f64, j: usize) -> (f64, f64) {
    let e = (j - 1) as f64;
    match family {
        Family::Linear => (1.0 + e * c, e * c),
        Family::Exponential => {
            let base = math::powf(pi, e);
            (c * base, base)
        }
        Family::Constant => {
            let small = math::powf(c, e);
            (2.0 - small, small)
        }
        Family::Custom => unreachable!("custom games carry explicit payoffs"),
    }
}

fn check_payoffs(payoffs: &[[f64; 2]]) -> Result<()> {
    let n = payoffs.len();
    if n < 5 || n.is_multiple_of(2) {
        return Err(invalid!("payoff table must have 2D+1 rows with D >= 2, got {n}"));
    }
    if let Some(j) = payoffs.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(invalid!("payoff at node {} is not finite", j + 1));
    }
    for j in 1..n {
        let mover = Player::mover(j).index();
        if !(payoffs[j - 1][mover] > payoffs[j][mover]) {
            return Err(invalid!(
                "mover dominance fails at node {j}: taking must beat the next node's payoff"
            ));
        }
    }
    Ok(())
}

impl fmt::Display for CentipedeGame {
    /// One line per terminal node: `node  X  Y`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>4}  {:>12}  {:>12}", "node", "player 1", "player 2")?;
        for (j, [x, y]) in self.payoffs.iter().enumerate() {
            writeln!(f, "{:>4}  {:>12}  {:>12}", j + 1, Trim(*x), Trim(*y))?;
        }
        Ok(())
    }
}

struct Trim(f64);

impl fmt::Display for Trim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // four decimals with trailing zeros dropped
        let mut s = alloc::format!("{:.4}", self.0);
        let keep = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(keep);
        if s == "-0" {
            s = String::from("0");
        }
        f.pad(&s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ElicitationForm {
    DirectResponse,
    ReducedStrategy,
    FullStrategy,
}

impl ElicitationForm {
    pub const ALL: [ElicitationForm; 3] = [
        ElicitationForm::DirectResponse,
        ElicitationForm::ReducedStrategy,
        ElicitationForm::FullStrategy,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ElicitationForm::DirectResponse => "dr",
            ElicitationForm::ReducedStrategy => "rs",
            ElicitationForm::FullStrategy => "fs",
        }
    }

    /// Size of one player's choice set: `D` binary nodes, `D + 1` reduced
    /// strategies or `2^D` full strategies.
    pub fn strategy_count(self, depth: usize) -> usize {
        match self {
            ElicitationForm::DirectResponse => depth,
            ElicitationForm::ReducedStrategy => depth + 1,
            ElicitationForm::FullStrategy => 1 << depth,
        }
    }

    pub fn is_strategic(self) -> bool {
        !matches!(self, ElicitationForm::DirectResponse)
    }
}

impl fmt::Display for ElicitationForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ElicitationForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dr" | "direct" | "direct_response" | "directresponse" => {
                Ok(ElicitationForm::DirectResponse)
            }
            "rs" | "reduced" | "reduced_strategy" | "reducedstrategy" => {
                Ok(ElicitationForm::ReducedStrategy)
            }
            "fs" | "full" | "full_strategy" | "fullstrategy" => Ok(ElicitationForm::FullStrategy),
            _ => Err(invalid!("unknown elicitation form '{s}'")),
        }
    }
}

/// Direct-response action at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Action {
    Take,
    Pass,
}

impl Action {
    pub fn symbol(self) -> char {
        match self {
            Action::Take => 'T',
            Action::Pass => 'P',
        }
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" | "t" | "take" | "Take" => Ok(Action::Take),
            "P" | "p" | "pass" | "Pass" => Ok(Action::Pass),
            _ => Err(invalid!("unknown action '{s}' (expected T or P)")),
        }
    }
}

/// "Take at own `m`-th node", with `m = D + 1` meaning always pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedStrategy(usize);

impl ReducedStrategy {
    pub fn new(m: usize, depth: usize) -> Result<ReducedStrategy> {
        if m == 0 || m > depth + 1 {
            return Err(invalid!("reduced strategy index {m} outside 1..={}", depth + 1));
        }
        Ok(ReducedStrategy(m))
    }

    pub fn always_pass(depth: usize) -> ReducedStrategy {
        ReducedStrategy(depth + 1)
    }

    /// Zero-based position in mixture vectors.
    pub fn from_index(index: usize, depth: usize) -> Result<ReducedStrategy> {
        ReducedStrategy::new(index + 1, depth)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 - 1
    }

    #[inline]
    pub fn m(self) -> usize {
        self.0
    }

    /// Node at which this strategy takes when played by `player`, or
    /// `2D + 1` for always-pass.
    pub fn take_node(self, player: Player, depth: usize) -> usize {
        if self.0 > depth {
            2 * depth + 1
        } else {
            player.own_node(self.0)
        }
    }

    pub fn label(self, depth: usize) -> String {
        let passes = self.0.min(depth + 1) - 1;
        let mut s: String = core::iter::repeat_n('P', passes.min(depth)).collect();
        if self.0 <= depth {
            s.push('T');
        }
        s
    }

    pub fn parse(label: &str, depth: usize) -> Result<ReducedStrategy> {
        let bytes = label.as_bytes();
        let passes = bytes.iter().take_while(|&&b| b == b'P').count();
        if passes == bytes.len() && passes == depth {
            return Ok(ReducedStrategy::always_pass(depth));
        }
        if passes + 1 == bytes.len() && bytes[passes] == b'T' && passes < depth {
            return Ok(ReducedStrategy(passes + 1));
        }
        Err(invalid!("'{label}' is not a reduced strategy for D = {depth}"))
    }
}

/// A complete plan, one take/pass choice per own node.
///
/// Enumeration order lists `T` before `P` position by position, so for
/// `D = 3` the indices run `TTT, TTP, TPT, TPP, PTT, PTP, PPT, PPP`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullStrategy(usize);

impl FullStrategy {
    pub fn from_index(index: usize, depth: usize) -> Result<FullStrategy> {
        if index >= (1 << depth) {
            return Err(invalid!("full strategy index {index} outside 0..{}", 1usize << depth));
        }
        Ok(FullStrategy(index))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }

    /// Whether the plan takes at own node `pos` (0-based).
    #[inline]
    pub fn takes_at(self, pos: usize, depth: usize) -> bool {
        (self.0 >> (depth - 1 - pos)) & 1 == 0
    }

    pub fn label(self, depth: usize) -> String {
        (0..depth)
            .map(|p| if self.takes_at(p, depth) { 'T' } else { 'P' })
            .collect()
    }

    pub fn parse(label: &str, depth: usize) -> Result<FullStrategy> {
        if label.len() != depth {
            return Err(invalid!("full strategy '{label}' must have {depth} symbols"));
        }
        let mut index = 0;
        for b in label.bytes() {
            index <<= 1;
            match b {
                b'T' => {}
                b'P' => index |= 1,
                _ => return Err(invalid!("full strategy '{label}' may only contain T and P")),
            }
        }
        Ok(FullStrategy(index))
    }

    /// Outcome-equivalent reduced strategy: take at the first planned `T`.
    pub fn reduce(self, depth: usize) -> ReducedStrategy {
        match (0..depth).find(|&p| self.takes_at(p, depth)) {
            Some(p) => ReducedStrategy(p + 1),
            None => ReducedStrategy::always_pass(depth),
        }
    }
}

/// Free-function form of [`FullStrategy::reduce`].
pub fn reduce_strategy(full: FullStrategy, depth: usize) -> ReducedStrategy {
    full.reduce(depth)
}

/// Node where play ends when the players use reduced strategies `s1`, `s2`.
pub fn terminal_node(s1: ReducedStrategy, s2: ReducedStrategy, depth: usize) -> usize {
    s1.take_node(Player::One, depth)
        .min(s2.take_node(Player::Two, depth))
}

/// Text label of the strategy with zero-based `index` under `form`.
/// For direct response the index is the own-node position.
pub fn strategy_label(form: ElicitationForm, index: usize, depth: usize) -> Result<String> {
    match form {
        ElicitationForm::DirectResponse => {
            if index >= depth {
                return Err(invalid!("node position {index} outside 0..{depth}"));
            }
            Ok(alloc::format!("node{}", index + 1))
        }
        ElicitationForm::ReducedStrategy => Ok(ReducedStrategy::from_index(index, depth)?.label(depth)),
        ElicitationForm::FullStrategy => Ok(FullStrategy::from_index(index, depth)?.label(depth)),
    }
}

/// Zero-based index of a strategy label under a strategic form.
pub fn parse_strategy(form: ElicitationForm, label: &str, depth: usize) -> Result<usize> {
    match form {
        ElicitationForm::DirectResponse => Err(Error::UnsupportedForm(
            "direct response records node choices, not strategies".into(),
        )),
        ElicitationForm::ReducedStrategy => Ok(ReducedStrategy::parse(label, depth)?.index()),
        ElicitationForm::FullStrategy => Ok(FullStrategy::parse(label, depth)?.index()),
    }
}

/// Maps a strategy index of `form` to its reduced strategy.
pub fn reduced_of(form: ElicitationForm, index: usize, depth: usize) -> Result<ReducedStrategy> {
    match form {
        ElicitationForm::ReducedStrategy => ReducedStrategy::from_index(index, depth),
        ElicitationForm::FullStrategy => Ok(FullStrategy::from_index(index, depth)?.reduce(depth)),
        ElicitationForm::DirectResponse => Err(Error::UnsupportedForm(
            "direct response has no strategy set".into(),
        )),
    }
}

/// Dense row-major payoff matrix, rows indexed by Player One's strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl PayoffMatrix {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

/// Normal-form (FS) or reduced-normal-form (RS) payoff matrices of both players.
pub fn strategy_payoff_matrix(
    game: &CentipedeGame,
    form: ElicitationForm,
) -> Result<[PayoffMatrix; 2]> {
    if !form.is_strategic() {
        return Err(Error::UnsupportedForm(
            "payoff matrices exist only for the strategy methods".into(),
        ));
    }
    let d = game.depth();
    let n = form.strategy_count(d);
    let mut mats = [
        PayoffMatrix { rows: n, cols: n, data: Vec::with_capacity(n * n) },
        PayoffMatrix { rows: n, cols: n, data: Vec::with_capacity(n * n) },
    ];
    for s1 in 0..n {
        let r1 = reduced_of(form, s1, d)?;
        for s2 in 0..n {
            let r2 = reduced_of(form, s2, d)?;
            let node = terminal_node(r1, r2, d);
            for p in Player::BOTH {
                mats[p.index()].data.push(game.payoff(node, p));
            }
        }
    }
    Ok(mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn small_linear_lab_payoffs() {
        let g = CentipedeGame::new(
            GameSpec::linear(0.5, 6).with_rescale(Rescale { a: 100.0, b: 50.0 }),
        )
        .unwrap();
        assert!(approx(g.payoff(1, Player::One), 150.0) && approx(g.payoff(1, Player::Two), 50.0));
        assert!(approx(g.payoff(7, Player::One), 450.0) && approx(g.payoff(7, Player::Two), 350.0));
    }

    #[test]
    fn large_exponential_lab_payoffs() {
        let g = CentipedeGame::new(GameSpec::exponential(4.0, 2.0, 6).with_lab_rescale()).unwrap();
        assert_eq!(g.payoffs()[0], [16.0, 4.0]);
        assert_eq!(g.payoffs()[5], [128.0, 512.0]);
        assert_eq!(g.payoffs()[6], [1024.0, 256.0]);
    }

    #[test]
    fn raw_linear_formula() {
        let g = CentipedeGame::new(GameSpec::linear(0.5, 6)).unwrap();
        assert_eq!(g.payoffs()[0], [1.0, 0.0]);
        assert_eq!(g.payoffs()[1], [0.5, 1.5]);
    }

    #[test]
    fn large_constant_lab_payoffs() {
        let g = CentipedeGame::new(GameSpec::constant(0.8, 6).with_lab_rescale()).unwrap();
        assert!(approx(g.payoff(2, Player::One), 200.0));
        assert!(approx(g.payoff(2, Player::Two), 300.0));
        // the printed game tree rounds 434.464 / 65.536 to whole points
        assert!((g.payoff(7, Player::One) - 434.0).abs() < 0.5);
        assert!((g.payoff(7, Player::Two) - 66.0).abs() < 0.5);
    }

    #[test]
    fn family_bounds_are_named() {
        let err = CentipedeGame::new(GameSpec::linear(1.2, 6)).unwrap_err();
        assert!(alloc::format!("{err}").contains("0 < c < 1"));
        let err = CentipedeGame::new(GameSpec::exponential(1.5, 2.0, 6)).unwrap_err();
        assert!(alloc::format!("{err}").contains("1 < pi < c"));
        assert!(CentipedeGame::new(GameSpec::constant(0.0, 6)).is_err());
        assert!(CentipedeGame::new(GameSpec::linear(0.5, 5)).is_err());
        assert!(CentipedeGame::new(GameSpec::linear(0.5, 2)).is_err());
        assert!(CentipedeGame::new(GameSpec::linear(0.5, 6).with_rescale(Rescale { a: -1.0, b: 0.0 })).is_err());
    }

    #[test]
    fn custom_games_need_mover_dominance() {
        let ok = vec![[4.0, 1.0], [2.0, 8.0], [16.0, 4.0], [8.0, 32.0], [64.0, 16.0]];
        assert!(CentipedeGame::from_payoffs(ok).is_ok());
        let bad = vec![[1.0, 1.0], [2.0, 8.0], [16.0, 4.0], [8.0, 32.0], [64.0, 16.0]];
        assert!(CentipedeGame::from_payoffs(bad).is_err());
        let even = vec![[4.0, 1.0], [2.0, 8.0], [16.0, 4.0], [8.0, 32.0]];
        assert!(CentipedeGame::from_payoffs(even).is_err());
    }

    #[test]
    fn terminal_nodes() {
        let d = 3;
        let t = ReducedStrategy::new(1, d).unwrap();
        for m in 1..=4 {
            assert_eq!(terminal_node(t, ReducedStrategy::new(m, d).unwrap(), d), 1);
        }
        let ppp = ReducedStrategy::parse("PPP", d).unwrap();
        let ppt = ReducedStrategy::parse("PPT", d).unwrap();
        assert_eq!(terminal_node(ppp, ppt, d), 6);
        assert_eq!(terminal_node(ppp, ppp, d), 7);
        assert_eq!(terminal_node(ppt, ppp, d), 5);
    }

    #[test]
    fn reductions() {
        let d = 3;
        let r = |s: &str| FullStrategy::parse(s, d).unwrap().reduce(d).label(d);
        assert_eq!(r("TPT"), "T");
        assert_eq!(r("PTP"), "PT");
        assert_eq!(r("PPP"), "PPP");
        assert_eq!(r("PPT"), "PPT");
    }

    #[test]
    fn enumeration_order_matches_listing() {
        let d = 3;
        let labels: Vec<String> = (0..8).map(|i| FullStrategy(i).label(d)).collect();
        assert_eq!(labels, ["TTT", "TTP", "TPT", "TPP", "PTT", "PTP", "PPT", "PPP"]);
        let reduced: Vec<String> = (0..4).map(|i| ReducedStrategy::from_index(i, d).unwrap().label(d)).collect();
        assert_eq!(reduced, ["T", "PT", "PPT", "PPP"]);
    }

    #[test]
    fn label_parsing_rejects_garbage() {
        assert!(ReducedStrategy::parse("PP", 3).is_err());
        assert!(ReducedStrategy::parse("TP", 3).is_err());
        assert!(ReducedStrategy::parse("PPPT", 3).is_err());
        assert!(FullStrategy::parse("TXT", 3).is_err());
        assert!(FullStrategy::parse("TT", 3).is_err());
        assert!(ReducedStrategy::new(0, 3).is_err());
        assert!(ReducedStrategy::new(5, 3).is_err());
    }

    #[test]
    fn payoff_matrices() {
        let g = CentipedeGame::new(GameSpec::linear(0.5, 6).with_lab_rescale()).unwrap();
        let [rs1, rs2] = strategy_payoff_matrix(&g, ElicitationForm::ReducedStrategy).unwrap();
        for col in 0..4 {
            assert_eq!((rs1.get(0, col), rs2.get(0, col)), (150.0, 50.0));
        }
        let [fs1, fs2] = strategy_payoff_matrix(&g, ElicitationForm::FullStrategy).unwrap();
        assert_eq!(fs1.data.len(), 64);
        for a in 0..8 {
            for b in 0..8 {
                let ra = FullStrategy(a).reduce(3).index();
                let rb = FullStrategy(b).reduce(3).index();
                assert_eq!(fs1.get(a, b), rs1.get(ra, rb));
                assert_eq!(fs2.get(a, b), rs2.get(ra, rb));
            }
        }
        assert!(matches!(
            strategy_payoff_matrix(&g, ElicitationForm::DirectResponse),
            Err(Error::UnsupportedForm(_))
        ));
    }

    #[test]
    fn constant_pair_for_always_pass() {
        let g = CentipedeGame::new(GameSpec::constant(0.8, 6).with_lab_rescale()).unwrap();
        let [m1, m2] = strategy_payoff_matrix(&g, ElicitationForm::ReducedStrategy).unwrap();
        assert!((m1.get(3, 3) - 434.0).abs() < 0.5);
        assert!((m2.get(3, 3) - 66.0).abs() < 0.5);
    }

    #[test]
    fn display_prints_one_row_per_node() {
        let g = CentipedeGame::new(GameSpec::linear(0.5, 6).with_lab_rescale()).unwrap();
        let text = alloc::format!("{g}");
        assert_eq!(text.lines().count(), 8);
        assert!(text.lines().nth(1).unwrap().contains("150"));
    }
}
