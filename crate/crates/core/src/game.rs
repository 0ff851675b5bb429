//! The two-player load-management stage game and its infinitely repeated
//! version under deterministic memory-1 strategies.
//!
//! Everything here is expressed as *costs*: players minimise. Conversion to
//! payoffs happens in [`crate::dynamics`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inconvenience cost `p` and continuation probability `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatedGameParams {
    p: f64,
    delta: f64,
}

impl RepeatedGameParams {
    pub fn new(p: f64, delta: f64) -> Result<Self> {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::param("p", format!("must be finite and >= 0, got {p}")));
        }
        if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
            return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
        }
        Ok(Self { p, delta })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    /// Run at the preferred start time.
    Pst,
    /// Move away from the preferred start time.
    Away,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Pst, Action::Away];

    pub fn letter(self) -> char {
        match self {
            Action::Pst => 'P',
            Action::Away => 'A',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c {
            'P' | 'p' => Some(Action::Pst),
            'A' | 'a' => Some(Action::Away),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Pst => f.write_str("PST"),
            Action::Away => f.write_str("Away"),
        }
    }
}

/// Stage costs `(row, column)` for a joint action.
///
/// | row \ col | PST        | Away       |
/// |-----------|------------|------------|
/// | PST       | 1, 1       | 0, 1+p     |
/// | Away      | 1+p, 0     | 2+p, 2+p   |
pub fn stage_cost(a1: Action, a2: Action, params: &RepeatedGameParams) -> (f64, f64) {
    let p = params.p;
    match (a1, a2) {
        (Action::Pst, Action::Pst) => (1.0, 1.0),
        (Action::Pst, Action::Away) => (0.0, 1.0 + p),
        (Action::Away, Action::Pst) => (1.0 + p, 0.0),
        (Action::Away, Action::Away) => (2.0 + p, 2.0 + p),
    }
}

/// `0 < p < 1`: PST is the unique stage best response yet mutual PST is not
/// socially optimal.
pub fn is_congestion_game(params: &RepeatedGameParams) -> bool {
    params.p > 0.0 && params.p < 1.0
}

/// `0 < p < delta`: alternating beats always-PST in the repeated game.
pub fn turn_taking_beneficial(params: &RepeatedGameParams) -> bool {
    params.p > 0.0 && params.p < params.delta
}

/// Pure stage-game equilibria: pairs where each action weakly minimises
/// cost against the other. Ties keep both actions.
pub fn stage_nash_equilibria(params: &RepeatedGameParams) -> Vec<(Action, Action)> {
    let mut out = Vec::new();
    for a1 in Action::ALL {
        for a2 in Action::ALL {
            let (c1, c2) = stage_cost(a1, a2, params);
            let row_ok = Action::ALL
                .iter()
                .all(|&d| stage_cost(d, a2, params).0 >= c1);
            let col_ok = Action::ALL
                .iter()
                .all(|&d| stage_cost(a1, d, params).1 >= c2);
            if row_ok && col_ok {
                out.push((a1, a2));
            }
        }
    }
    out
}

/// Deterministic memory-1 strategy: an opening action plus a reaction to the
/// opponent's previous action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Memory1Strategy {
    pub initial: Action,
    pub after_pst: Action,
    pub after_away: Action,
}

impl Memory1Strategy {
    pub const fn new(initial: Action, after_pst: Action, after_away: Action) -> Self {
        Self {
            initial,
            after_pst,
            after_away,
        }
    }

    pub const PPP: Self = Self::new(Action::Pst, Action::Pst, Action::Pst);
    pub const PPA: Self = Self::new(Action::Pst, Action::Pst, Action::Away);
    pub const PAP: Self = Self::new(Action::Pst, Action::Away, Action::Pst);
    pub const PAA: Self = Self::new(Action::Pst, Action::Away, Action::Away);
    pub const APP: Self = Self::new(Action::Away, Action::Pst, Action::Pst);
    pub const APA: Self = Self::new(Action::Away, Action::Pst, Action::Away);
    pub const AAP: Self = Self::new(Action::Away, Action::Away, Action::Pst);
    pub const AAA: Self = Self::new(Action::Away, Action::Away, Action::Away);

    /// All eight strategies in canonical order PPP, PPA, ..., AAA.
    pub const ALL: [Self; 8] = [
        Self::PPP,
        Self::PPA,
        Self::PAP,
        Self::PAA,
        Self::APP,
        Self::APA,
        Self::AAP,
        Self::AAA,
    ];

    pub fn respond(&self, opponent_last: Action) -> Action {
        match opponent_last {
            Action::Pst => self.after_pst,
            Action::Away => self.after_away,
        }
    }

    pub fn name(&self) -> String {
        [self.initial, self.after_pst, self.after_away]
            .iter()
            .map(|a| a.letter())
            .collect()
    }

    /// Position in [`Self::ALL`].
    pub fn index(&self) -> usize {
        let bit = |a: Action| (a == Action::Away) as usize;
        bit(self.initial) * 4 + bit(self.after_pst) * 2 + bit(self.after_away)
    }
}

impl fmt::Display for Memory1Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Memory1Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let acts: Option<Vec<Action>> = s.chars().map(Action::from_letter).collect();
        match acts.as_deref() {
            Some(&[i, p, a]) => Ok(Self::new(i, p, a)),
            _ => Err(Error::param(
                "strategy",
                format!("expected three letters from {{P, A}}, got {s:?}"),
            )),
        }
    }
}

pub type JointAction = (Action, Action);

/// Exact decomposition of an eventually periodic joint play path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayPath {
    pub preperiod: Vec<JointAction>,
    pub cycle: Vec<JointAction>,
}

impl PlayPath {
    /// The joint action played in round `t` (0-based).
    pub fn at(&self, t: usize) -> JointAction {
        if t < self.preperiod.len() {
            self.preperiod[t]
        } else {
            self.cycle[(t - self.preperiod.len()) % self.cycle.len()]
        }
    }
}

/// Joint play of two memory-1 strategies, split into preperiod and cycle.
///
/// The successor of a joint action depends only on that joint action, so the
/// path enters a cycle within the four joint states.
pub fn memory1_play_sequence(s1: Memory1Strategy, s2: Memory1Strategy) -> PlayPath {
    let mut path: Vec<JointAction> = Vec::with_capacity(5);
    let mut cur = (s1.initial, s2.initial);
    loop {
        if let Some(first) = path.iter().position(|&j| j == cur) {
            let cycle = path.split_off(first);
            return PlayPath {
                preperiod: path,
                cycle,
            };
        }
        path.push(cur);
        cur = (s1.respond(cur.1), s2.respond(cur.0));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountedCostPair {
    pub cost_1: f64,
    pub cost_2: f64,
    /// `(1 - delta) * cost_1`, the per-round average.
    pub normalized_1: f64,
    pub normalized_2: f64,
}

/// Exact discounted costs `sum_t delta^t c_t` for a strategy pair.
pub fn memory1_discounted_costs(
    s1: Memory1Strategy,
    s2: Memory1Strategy,
    params: &RepeatedGameParams,
) -> DiscountedCostPair {
    let delta = params.delta;
    let path = memory1_play_sequence(s1, s2);

    let mut pre = (0.0, 0.0);
    let mut w = 1.0;
    for &(a1, a2) in &path.preperiod {
        let (c1, c2) = stage_cost(a1, a2, params);
        pre.0 += w * c1;
        pre.1 += w * c2;
        w *= delta;
    }
    let offset = w;

    let mut cyc = (0.0, 0.0);
    let mut w = 1.0;
    for &(a1, a2) in &path.cycle {
        let (c1, c2) = stage_cost(a1, a2, params);
        cyc.0 += w * c1;
        cyc.1 += w * c2;
        w *= delta;
    }
    let scale = offset / (1.0 - w);

    let cost_1 = pre.0 + cyc.0 * scale;
    let cost_2 = pre.1 + cyc.1 * scale;
    DiscountedCostPair {
        cost_1,
        cost_2,
        normalized_1: (1.0 - delta) * cost_1,
        normalized_2: (1.0 - delta) * cost_2,
    }
}

/// True when `candidate` beats `current` by more than rounding noise.
fn strictly_less(candidate: f64, current: f64) -> bool {
    candidate < current - 1e-12 * current.abs().max(1.0)
}

/// Pure equilibria of the repeated game over all 64 ordered pairs: neither
/// player can strictly lower their discounted cost by switching to any other
/// memory-1 strategy.
pub fn memory1_nash_equilibria(
    params: &RepeatedGameParams,
) -> Vec<(Memory1Strategy, Memory1Strategy)> {
    let table = payoff_table(params);
    let mut out = Vec::new();
    for (i, &s1) in Memory1Strategy::ALL.iter().enumerate() {
        for (j, &s2) in Memory1Strategy::ALL.iter().enumerate() {
            let here = table[i][j];
            let p1_dev = (0..8).any(|k| strictly_less(table[k][j].cost_1, here.cost_1));
            let p2_dev = (0..8).any(|k| strictly_less(table[i][k].cost_2, here.cost_2));
            if !p1_dev && !p2_dev {
                out.push((s1, s2));
            }
        }
    }
    out
}

/// The full 8x8 table of discounted costs, indexed by [`Memory1Strategy::index`].
pub fn payoff_table(params: &RepeatedGameParams) -> [[DiscountedCostPair; 8]; 8] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            memory1_discounted_costs(Memory1Strategy::ALL[i], Memory1Strategy::ALL[j], params)
        })
    })
}

/// Whether a per-round cost pair is a mutually beneficial feasible outcome:
/// strictly below mutual PST for both players and inside the convex hull of
/// the four stage cost pairs.
pub fn folk_region_contains(cost_pair: (f64, f64), params: &RepeatedGameParams) -> bool {
    let (c1, c2) = cost_pair;
    if !(c1 < 1.0 && c2 < 1.0) {
        return false;
    }
    let p = params.p;
    let pts = [(1.0, 1.0), (0.0, 1.0 + p), (1.0 + p, 0.0), (2.0 + p, 2.0 + p)];
    point_in_hull(&convex_hull(&pts), (c1, c2))
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone-chain hull, counter-clockwise, collinear points dropped.
fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn point_in_hull(hull: &[(f64, f64)], q: (f64, f64)) -> bool {
    const EPS: f64 = 1e-12;
    match hull.len() {
        0 => false,
        1 => (hull[0].0 - q.0).abs() < EPS && (hull[0].1 - q.1).abs() < EPS,
        n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], q) >= -EPS),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, delta: f64) -> RepeatedGameParams {
        RepeatedGameParams::new(p, delta).unwrap()
    }

    /// Brute-force discounted sum over a finite horizon.
    fn truncated(s1: Memory1Strategy, s2: Memory1Strategy, g: &RepeatedGameParams, n: usize) -> (f64, f64) {
        let (mut a1, mut a2) = (s1.initial, s2.initial);
        let (mut c1, mut c2, mut w) = (0.0, 0.0, 1.0);
        for _ in 0..n {
            let (x, y) = stage_cost(a1, a2, g);
            c1 += w * x;
            c2 += w * y;
            w *= g.delta();
            (a1, a2) = (s1.respond(a2), s2.respond(a1));
        }
        (c1, c2)
    }

    #[test]
    fn stage_costs_match_table() {
        let g = params(0.5, 0.9);
        assert_eq!(stage_cost(Action::Pst, Action::Pst, &g), (1.0, 1.0));
        assert_eq!(stage_cost(Action::Pst, Action::Away, &g), (0.0, 1.5));
        assert_eq!(stage_cost(Action::Away, Action::Pst, &g), (1.5, 0.0));
        let g0 = params(0.0, 0.9);
        assert_eq!(stage_cost(Action::Away, Action::Away, &g0), (2.0, 2.0));
    }

    #[test]
    fn dilemma_predicates() {
        assert!(is_congestion_game(&params(0.5, 0.9)));
        assert!(!is_congestion_game(&params(0.0, 0.9)));
        assert!(!is_congestion_game(&params(1.0, 0.9)));
        assert!(turn_taking_beneficial(&params(0.5, 0.95)));
        assert!(turn_taking_beneficial(&params(0.5, 0.51)));
        assert!(!turn_taking_beneficial(&params(0.5, 0.4)));
    }

    #[test]
    fn stage_equilibria() {
        use Action::*;
        assert_eq!(stage_nash_equilibria(&params(0.5, 0.9)), vec![(Pst, Pst)]);
        assert_eq!(
            stage_nash_equilibria(&params(0.0, 0.9)),
            vec![(Pst, Pst), (Pst, Away), (Away, Pst)]
        );
        assert_eq!(stage_nash_equilibria(&params(2.0, 0.9)), vec![(Pst, Pst)]);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(RepeatedGameParams::new(-0.1, 0.5).is_err());
        assert!(RepeatedGameParams::new(0.5, 0.0).is_err());
        assert!(RepeatedGameParams::new(0.5, 1.0).is_err());
        assert!(RepeatedGameParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for (i, s) in Memory1Strategy::ALL.iter().enumerate() {
            assert_eq!(s.index(), i);
            assert_eq!(s.name().parse::<Memory1Strategy>().unwrap(), *s);
        }
        assert_eq!(Memory1Strategy::ALL.map(|s| s.name()).join(","), "PPP,PPA,PAP,PAA,APP,APA,AAP,AAA");
        assert!("PPX".parse::<Memory1Strategy>().is_err());
        assert!("PP".parse::<Memory1Strategy>().is_err());
    }

    #[test]
    fn play_sequences() {
        use Action::*;
        let m = memory1_play_sequence(Memory1Strategy::PPA, Memory1Strategy::APA);
        assert!(m.preperiod.is_empty());
        assert_eq!(m.cycle, vec![(Pst, Away), (Away, Pst)]);
        let m = memory1_play_sequence(Memory1Strategy::PPP, Memory1Strategy::PPP);
        assert!(m.preperiod.is_empty());
        assert_eq!(m.cycle, vec![(Pst, Pst)]);
        let m = memory1_play_sequence(Memory1Strategy::AAA, Memory1Strategy::AAA);
        assert!(m.preperiod.is_empty());
        assert_eq!(m.cycle, vec![(Away, Away)]);
    }

    #[test]
    fn play_path_reproduces_simulation() {
        for s1 in Memory1Strategy::ALL {
            for s2 in Memory1Strategy::ALL {
                let path = memory1_play_sequence(s1, s2);
                assert!(path.preperiod.len() <= 4);
                assert!([1, 2, 4].contains(&path.cycle.len()), "{s1},{s2}");
                let (mut a1, mut a2) = (s1.initial, s2.initial);
                for t in 0..40 {
                    assert_eq!(path.at(t), (a1, a2));
                    (a1, a2) = (s1.respond(a2), s2.respond(a1));
                }
            }
        }
    }

    #[test]
    fn discounted_examples_against_truncated_oracle() {
        use Memory1Strategy as S;
        let g = params(0.5, 0.9);
        let c = memory1_discounted_costs(S::PPP, S::PPP, &g);
        let t = truncated(S::PPP, S::PPP, &g, 1000);
        assert!((c.cost_1 - 10.0).abs() < 1e-9 && (t.0 - 10.0).abs() < 1e-9);
        assert!((c.cost_2 - 10.0).abs() < 1e-9);

        let c = memory1_discounted_costs(S::PPA, S::APA, &g);
        let t = truncated(S::PPA, S::APA, &g, 1000);
        assert!((c.cost_1 - 7.105263157894737).abs() < 1e-9);
        assert!((c.cost_2 - 7.894736842105263).abs() < 1e-9);
        assert!((c.cost_1 - t.0).abs() < 1e-9 && (c.cost_2 - t.1).abs() < 1e-9);

        let g = params(0.5, 0.5);
        let c = memory1_discounted_costs(S::AAA, S::AAA, &g);
        assert!((c.cost_1 - 5.0).abs() < 1e-12 && (c.cost_2 - 5.0).abs() < 1e-12);
        assert!((c.normalized_1 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn nash_sets_at_reference_points() {
        use Memory1Strategy as S;
        // With p < delta the strict-deviation test yields exactly the three
        // highlighted cells of the payoff table.
        let eq = memory1_nash_equilibria(&params(0.5, 0.95));
        assert_eq!(eq, vec![(S::PPP, S::PPP), (S::PPA, S::APA), (S::APA, S::PPA)]);
        // (PPA, PPA) and (PPP, PPA) are not equilibria here: a PPA opponent
        // is exploited by switching to APP.
        let g = params(0.5, 0.95);
        let stay = memory1_discounted_costs(S::PPA, S::PPA, &g).cost_1;
        let dev = memory1_discounted_costs(S::APP, S::PPA, &g).cost_1;
        assert!(dev < stay);

        // Once delta < p the turn-taking pairs vanish and the settled-PST
        // pairs all qualify.
        let eq = memory1_nash_equilibria(&params(0.5, 0.4));
        assert!(!eq.contains(&(S::PPA, S::APA)));
        assert!(!eq.contains(&(S::APA, S::PPA)));
        assert_eq!(
            eq,
            vec![(S::PPP, S::PPP), (S::PPP, S::PPA), (S::PPA, S::PPP), (S::PPA, S::PPA)]
        );
    }

    #[test]
    fn folk_region_examples() {
        let g = params(0.5, 0.9);
        assert!(folk_region_contains((0.75, 0.75), &g));
        assert!(!folk_region_contains((1.0, 1.0), &g));
        assert!(!folk_region_contains((0.0, 1.5), &g));
        assert!(!folk_region_contains((0.1, 0.1), &g));
        // The region shrinks towards (1,1) as p grows and is empty for p >= 1.
        let g = params(0.9, 0.95);
        assert!(folk_region_contains((0.96, 0.96), &g));
        assert!(!folk_region_contains((0.94, 0.94), &g));
        let g = params(1.5, 0.95);
        assert!(!folk_region_contains((0.99, 0.99), &g));
    }
}
