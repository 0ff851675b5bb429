//! Demand-side load management environment.
//!
//! Consumers own appliances with a run duration, a constant power draw and a
//! start window `[est, lst]` around a preferred start `pst`. Each planning
//! slot is priced by a merit-order step function of the aggregate demand in
//! that slot; every kW drawn in a slot pays the slot's unit price.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{from_json, Error, Result};
use crate::game::Action;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Appliance {
    /// Run length in slots.
    pub duration: usize,
    pub power_kw: f64,
    pub est: usize,
    pub pst: usize,
    pub lst: usize,
    /// Currency per slot of deviation from `pst`.
    pub inconvenience_per_slot: f64,
}

impl Appliance {
    pub fn starts(&self) -> RangeInclusive<usize> {
        self.est..=self.lst
    }

    pub fn window_len(&self) -> usize {
        self.lst - self.est + 1
    }

    pub fn inconvenience(&self, start: usize) -> f64 {
        self.inconvenience_per_slot * start.abs_diff(self.pst) as f64
    }
}

/// One merit-order band. `volume_kw` is the cumulative demand up to which the
/// band applies; `None` marks the unbounded top band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceBand {
    #[serde(default)]
    pub volume_kw: Option<f64>,
    pub price_per_kwh: f64,
}

/// Band lists per pricing slot. Planning slot `t` is priced with
/// `slots[t % slots.len()]`, so a single entry prices every slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceTable {
    pub slots: Vec<Vec<PriceBand>>,
}

impl PriceTable {
    pub fn uniform(bands: Vec<PriceBand>) -> Self {
        Self { slots: vec![bands] }
    }

    pub fn bands(&self, slot: usize) -> &[PriceBand] {
        &self.slots[slot % self.slots.len()]
    }

    fn validate(&self) -> Result<()> {
        if self.slots.is_empty() {
            return Err(Error::parse("/price_table", "at least one slot is required"));
        }
        for (t, bands) in self.slots.iter().enumerate() {
            let at = |j: usize, field: &str| format!("/price_table/{t}/{j}/{field}");
            if bands.is_empty() {
                return Err(Error::parse(format!("/price_table/{t}"), "no bands"));
            }
            let mut prev_vol = 0.0;
            let mut prev_price = f64::NEG_INFINITY;
            for (j, b) in bands.iter().enumerate() {
                let last = j + 1 == bands.len();
                if !b.price_per_kwh.is_finite() || b.price_per_kwh < 0.0 {
                    return Err(Error::parse(at(j, "price_per_kwh"), "must be finite and >= 0"));
                }
                if b.price_per_kwh < prev_price {
                    return Err(Error::parse(
                        at(j, "price_per_kwh"),
                        "prices must be non-decreasing across bands",
                    ));
                }
                prev_price = b.price_per_kwh;
                match (b.volume_kw, last) {
                    (None, true) => {}
                    (None, false) => {
                        return Err(Error::parse(at(j, "volume_kw"), "only the last band may be unbounded"))
                    }
                    (Some(_), true) => {
                        return Err(Error::parse(at(j, "volume_kw"), "the last band must be unbounded"))
                    }
                    (Some(v), false) => {
                        if !v.is_finite() || v <= prev_vol {
                            return Err(Error::parse(
                                at(j, "volume_kw"),
                                "volumes must be finite and strictly increasing from 0",
                            ));
                        }
                        prev_vol = v;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Unit price paid in `slot` when the aggregate demand is `demand_kw`. Demand
/// exactly at a band's volume pays that band's price.
pub fn unit_price(table: &PriceTable, slot: usize, demand_kw: f64) -> f64 {
    let bands = table.bands(slot);
    bands
        .iter()
        .find(|b| b.volume_kw.is_none_or(|v| demand_kw <= v))
        .unwrap_or(&bands[bands.len() - 1])
        .price_per_kwh
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Consumer {
    pub appliances: Vec<Appliance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    /// Number of planning slots.
    pub horizon: usize,
    pub slot_length_hours: f64,
    pub price_table: PriceTable,
    pub consumers: Vec<Consumer>,
}

impl Instance {
    /// Parse and validate an instance document.
    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = from_json(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::parse("/horizon", "must be >= 1"));
        }
        if !self.slot_length_hours.is_finite() || self.slot_length_hours <= 0.0 {
            return Err(Error::parse("/slot_length_hours", "must be finite and > 0"));
        }
        self.price_table.validate()?;
        if self.consumers.is_empty() {
            return Err(Error::parse("/consumers", "at least one consumer is required"));
        }
        for (i, c) in self.consumers.iter().enumerate() {
            for (j, a) in c.appliances.iter().enumerate() {
                let at = |f: &str| format!("/consumers/{i}/appliances/{j}/{f}");
                if a.duration == 0 || a.duration > self.horizon {
                    return Err(Error::parse(at("duration"), "must be in [1, horizon]"));
                }
                if !a.power_kw.is_finite() || a.power_kw <= 0.0 {
                    return Err(Error::parse(at("power_kw"), "must be finite and > 0"));
                }
                if !a.inconvenience_per_slot.is_finite() || a.inconvenience_per_slot < 0.0 {
                    return Err(Error::parse(at("inconvenience_per_slot"), "must be finite and >= 0"));
                }
                if a.est > a.pst {
                    return Err(Error::parse(at("est"), "est must not exceed pst"));
                }
                if a.pst > a.lst {
                    return Err(Error::parse(at("lst"), "lst must not precede pst"));
                }
                if a.lst + a.duration > self.horizon {
                    return Err(Error::parse(at("lst"), "lst + duration exceeds the horizon"));
                }
            }
        }
        Ok(())
    }

    pub fn appliance_count(&self) -> usize {
        self.consumers.iter().map(|c| c.appliances.len()).sum()
    }

    /// Every appliance at its preferred start.
    pub fn pst_schedule(&self) -> Schedule {
        Schedule {
            start: self
                .consumers
                .iter()
                .map(|c| c.appliances.iter().map(|a| a.pst).collect())
                .collect(),
        }
    }

    /// Product of all window sizes.
    pub fn search_space(&self) -> u128 {
        self.consumers
            .iter()
            .flat_map(|c| &c.appliances)
            .fold(1u128, |acc, a| acc.saturating_mul(a.window_len() as u128))
    }

    fn slot_energy(&self, slot: usize, demand_kw: f64) -> f64 {
        unit_price(&self.price_table, slot, demand_kw) * demand_kw * self.slot_length_hours
    }
}

/// `start[i][j]`: start slot of consumer `i`'s appliance `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub start: Vec<Vec<usize>>,
}

impl Schedule {
    pub fn from_json(text: &str) -> Result<Self> {
        from_json(text)
    }

    fn check(&self, inst: &Instance) -> Result<()> {
        if self.start.len() != inst.consumers.len() {
            return Err(Error::Shape(format!(
                "schedule has {} consumers, instance has {}",
                self.start.len(),
                inst.consumers.len()
            )));
        }
        for (i, (row, c)) in self.start.iter().zip(&inst.consumers).enumerate() {
            if row.len() != c.appliances.len() {
                return Err(Error::Shape(format!(
                    "consumer {i}: schedule has {} appliances, instance has {}",
                    row.len(),
                    c.appliances.len()
                )));
            }
            for (j, (&s, a)) in row.iter().zip(&c.appliances).enumerate() {
                if !a.starts().contains(&s) {
                    return Err(Error::WindowViolation {
                        consumer: i,
                        appliance: j,
                        start: s,
                        est: a.est,
                        lst: a.lst,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumerCost {
    pub energy_cost: f64,
    pub inconvenience_cost: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub consumers: Vec<ConsumerCost>,
    /// Aggregate demand per slot.
    pub demand_kw: Vec<f64>,
    /// `consumer_demand_kw[i][t]`.
    pub consumer_demand_kw: Vec<Vec<f64>>,
    pub unit_price: Vec<f64>,
    pub system_cost: f64,
}

impl CostBreakdown {
    /// Per-slot demand and price series.
    pub fn slot_series_csv(&self) -> String {
        let mut out = String::from("slot,demand_kw,unit_price_per_kwh");
        for i in 0..self.consumers.len() {
            let _ = write!(out, ",consumer_{i}_kw");
        }
        out.push('\n');
        for t in 0..self.demand_kw.len() {
            let _ = write!(out, "{t},{},{}", self.demand_kw[t], self.unit_price[t]);
            for d in &self.consumer_demand_kw {
                let _ = write!(out, ",{}", d[t]);
            }
            out.push('\n');
        }
        out
    }
}

fn add_load(demand: &mut [f64], a: &Appliance, start: usize) {
    for d in &mut demand[start..start + a.duration] {
        *d += a.power_kw;
    }
}

pub fn evaluate_schedule(inst: &Instance, schedule: &Schedule) -> Result<CostBreakdown> {
    schedule.check(inst)?;
    let h = inst.horizon;
    let mut consumer_demand = vec![vec![0.0; h]; inst.consumers.len()];
    let mut inconvenience = vec![0.0; inst.consumers.len()];
    for (i, c) in inst.consumers.iter().enumerate() {
        for (a, &s) in c.appliances.iter().zip(&schedule.start[i]) {
            add_load(&mut consumer_demand[i], a, s);
            inconvenience[i] += a.inconvenience(s);
        }
    }
    let demand: Vec<f64> = (0..h)
        .map(|t| consumer_demand.iter().map(|d| d[t]).sum())
        .collect();
    let price: Vec<f64> = (0..h)
        .map(|t| unit_price(&inst.price_table, t, demand[t]))
        .collect();
    let consumers: Vec<ConsumerCost> = consumer_demand
        .iter()
        .zip(&inconvenience)
        .map(|(d, &inc)| {
            let energy: f64 = (0..h)
                .map(|t| price[t] * d[t] * inst.slot_length_hours)
                .sum();
            ConsumerCost {
                energy_cost: energy,
                inconvenience_cost: inc,
                total: energy + inc,
            }
        })
        .collect();
    let system_cost = consumers.iter().map(|c| c.total).sum();
    Ok(CostBreakdown {
        consumers,
        demand_kw: demand,
        consumer_demand_kw: consumer_demand,
        unit_price: price,
        system_cost,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Largest admissible product of window sizes.
    pub max_nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_nodes: 50_000_000,
        }
    }
}

impl SearchBudget {
    fn admit(&self, required: u128) -> Result<()> {
        if required > self.max_nodes as u128 {
            return Err(Error::BudgetExceeded {
                required,
                max_nodes: self.max_nodes,
            });
        }
        Ok(())
    }
}

pub(crate) fn tol(c: f64) -> f64 {
    1e-9 * c.abs().max(1.0)
}

struct Search<'a> {
    inst: &'a Instance,
    items: Vec<(usize, &'a Appliance)>,
    /// Lower bound on the cost of items `k..`.
    rest_lb: Vec<f64>,
    demand: Vec<f64>,
    saved: Vec<f64>,
    starts: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn run(&mut self, k: usize, cost: f64) {
        if let Some((best, _)) = &self.best {
            if cost + self.rest_lb[k] >= best - tol(*best) {
                return;
            }
        }
        if k == self.items.len() {
            self.best = Some((cost, self.starts.clone()));
            return;
        }
        let a = self.items[k].1;
        for s in a.starts() {
            let mark = self.saved.len();
            let mut delta = a.inconvenience(s);
            for t in s..s + a.duration {
                let before = self.demand[t];
                let after = before + a.power_kw;
                delta += self.inst.slot_energy(t, after) - self.inst.slot_energy(t, before);
                self.saved.push(before);
                self.demand[t] = after;
            }
            self.starts[k] = s;
            self.run(k + 1, cost + delta);
            for (t, v) in (s..s + a.duration).zip(self.saved.drain(mark..)) {
                self.demand[t] = v;
            }
        }
    }
}

/// Minimum system cost schedule by depth-first branch and bound over the
/// appliances in consumer-major order. Among optimal schedules the one with
/// the lexicographically smallest flattened start vector is returned.
///
/// The bound adds, for every unscheduled appliance, its cheapest placement
/// when every slot is billed at its first-band price. Energy already placed is
/// billed at the current partial prices, which can only rise.
pub fn solve_centralized(inst: &Instance, budget: &SearchBudget) -> Result<(Schedule, CostBreakdown)> {
    inst.validate()?;
    budget.admit(inst.search_space())?;
    let items: Vec<(usize, &Appliance)> = inst
        .consumers
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.appliances.iter().map(move |a| (i, a)))
        .collect();
    let floor_price: Vec<f64> = (0..inst.horizon)
        .map(|t| inst.price_table.bands(t)[0].price_per_kwh)
        .collect();
    let mut rest_lb = vec![0.0; items.len() + 1];
    for k in (0..items.len()).rev() {
        let a = items[k].1;
        let cheapest = a
            .starts()
            .map(|s| {
                let e: f64 = floor_price[s..s + a.duration].iter().sum();
                e * a.power_kw * inst.slot_length_hours + a.inconvenience(s)
            })
            .fold(f64::INFINITY, f64::min);
        rest_lb[k] = rest_lb[k + 1] + cheapest;
    }
    let mut search = Search {
        inst,
        starts: vec![0; items.len()],
        items,
        rest_lb,
        demand: vec![0.0; inst.horizon],
        saved: Vec::new(),
        best: None,
    };
    search.run(0, 0.0);
    let (_, flat) = search.best.expect("every window is non-empty");
    let mut it = flat.into_iter();
    let schedule = Schedule {
        start: inst
            .consumers
            .iter()
            .map(|c| c.appliances.iter().map(|_| it.next().unwrap()).collect())
            .collect(),
    };
    let breakdown = evaluate_schedule(inst, &schedule)?;
    Ok((schedule, breakdown))
}

/// Cheapest schedule for `consumer` with everyone else's starts fixed. Ties go
/// to the smallest total deviation from `pst`, then the smallest start vector.
pub fn best_response(
    inst: &Instance,
    schedule: &Schedule,
    consumer: usize,
    budget: &SearchBudget,
) -> Result<(Schedule, f64)> {
    schedule.check(inst)?;
    let Some(focal) = inst.consumers.get(consumer) else {
        return Err(Error::Shape(format!("no consumer {consumer}")));
    };
    let required = focal
        .appliances
        .iter()
        .fold(1u128, |acc, a| acc.saturating_mul(a.window_len() as u128));
    budget.admit(required)?;

    let mut others = vec![0.0; inst.horizon];
    for (i, c) in inst.consumers.iter().enumerate() {
        if i != consumer {
            for (a, &s) in c.appliances.iter().zip(&schedule.start[i]) {
                add_load(&mut others, a, s);
            }
        }
    }

    let apps = &focal.appliances;
    let mut starts: Vec<usize> = apps.iter().map(|a| a.est).collect();
    let mut own = vec![0.0; inst.horizon];
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    loop {
        own.iter_mut().for_each(|v| *v = 0.0);
        let mut cost = 0.0;
        let mut dev = 0;
        for (a, &s) in apps.iter().zip(&starts) {
            add_load(&mut own, a, s);
            cost += a.inconvenience(s);
            dev += s.abs_diff(a.pst);
        }
        for t in 0..inst.horizon {
            if own[t] > 0.0 {
                cost += unit_price(&inst.price_table, t, others[t] + own[t])
                    * own[t]
                    * inst.slot_length_hours;
            }
        }
        let better = match &best {
            None => true,
            Some((b, bdev, _)) => cost < b - tol(*b) || (cost <= b + tol(*b) && dev < *bdev),
        };
        if better {
            best = Some((cost, dev, starts.clone()));
        }
        // Odometer over the windows, last appliance fastest.
        let mut k = apps.len();
        loop {
            if k == 0 {
                let (cost, _, starts) = best.expect("at least one candidate");
                let mut out = schedule.clone();
                out.start[consumer] = starts;
                return Ok((out, cost));
            }
            k -= 1;
            if starts[k] < apps[k].lst {
                starts[k] += 1;
                break;
            }
            starts[k] = apps[k].est;
        }
    }
}

/// Excess of the consumer's current cost over its best-response cost, zero
/// when it is already best-responding.
pub fn cost_of_cooperation(
    inst: &Instance,
    schedule: &Schedule,
    consumer: usize,
    budget: &SearchBudget,
) -> Result<f64> {
    let (_, br) = best_response(inst, schedule, consumer, budget)?;
    let current = evaluate_schedule(inst, schedule)?.consumers[consumer].total;
    let excess = current - br;
    Ok(if excess > tol(current) { excess } else { 0.0 })
}

/// Two-consumer, one-appliance-each instance reduced to a 2x2 cost table over
/// {stay at pst, move to the designated away slot}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStageGame {
    pub away: [usize; 2],
    /// `costs[a1][a2]`, index 0 = PST, 1 = Away.
    pub costs: [[(f64, f64); 2]; 2],
}

impl EmpiricalStageGame {
    pub fn cost(&self, a1: Action, a2: Action) -> (f64, f64) {
        self.costs[a1 as usize][a2 as usize]
    }

    /// Row player's costs mapped affinely so that (PST, PST) costs 1 and
    /// (PST, Away) costs 0. Returns `None` when those two coincide.
    pub fn normalized_row(&self) -> Option<[[f64; 2]; 2]> {
        let base = self.costs[0][1].0;
        let unit = self.costs[0][0].0 - base;
        if unit.abs() < tol(base) {
            return None;
        }
        Some(self.costs.map(|row| row.map(|(c, _)| (c - base) / unit)))
    }

    /// Inconvenience parameter of the normalised table: (Away, PST) − 1.
    pub fn normalized_p(&self) -> Option<f64> {
        self.normalized_row().map(|n| n[1][0] - 1.0)
    }

    /// Whether the normalised table has the minimal load-management form
    /// (1, 0, 1+p, 2+p) and is symmetric under swapping players.
    pub fn is_minimal_form(&self, eps: f64) -> bool {
        let (Some(n), Some(p)) = (self.normalized_row(), self.normalized_p()) else {
            return false;
        };
        let symmetric = (0..2).all(|a| {
            (0..2).all(|b| (self.costs[a][b].0 - self.costs[b][a].1).abs() <= eps * self.costs[a][b].0.abs().max(1.0))
        });
        symmetric && (n[1][1] - (2.0 + p)).abs() <= eps
    }
}

pub fn stage_game_from_instance(inst: &Instance, away: [usize; 2]) -> Result<EmpiricalStageGame> {
    if inst.consumers.len() != 2 || inst.consumers.iter().any(|c| c.appliances.len() != 1) {
        return Err(Error::Shape(
            "stage game needs exactly 2 consumers with 1 appliance each".into(),
        ));
    }
    let pick = |i: usize, a: Action| match a {
        Action::Pst => inst.consumers[i].appliances[0].pst,
        Action::Away => away[i],
    };
    let mut costs = [[(0.0, 0.0); 2]; 2];
    for a1 in Action::ALL {
        for a2 in Action::ALL {
            let s = Schedule {
                start: vec![vec![pick(0, a1)], vec![pick(1, a2)]],
            };
            let b = evaluate_schedule(inst, &s)?;
            costs[a1 as usize][a2 as usize] = (b.consumers[0].total, b.consumers[1].total);
        }
    }
    Ok(EmpiricalStageGame { away, costs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::example_instance_sec2;

    fn two(a: usize, b: usize) -> Schedule {
        Schedule {
            start: vec![vec![a], vec![b]],
        }
    }

    #[test]
    fn band_lookup() {
        let inst = example_instance_sec2();
        let t = &inst.price_table;
        assert_eq!(unit_price(t, 0, 0.0), 5.0);
        assert_eq!(unit_price(t, 7, 5.0), 5.0);
        assert_eq!(unit_price(t, 7, 5.000001), 10.0);
        assert_eq!(unit_price(t, 23, 10.0), 10.0);
    }

    #[test]
    fn worked_example_costs() {
        let inst = example_instance_sec2();
        let b = evaluate_schedule(&inst, &two(2, 2)).unwrap();
        assert_eq!(b.consumers[0].total, 500.0);
        assert_eq!(b.consumers[1].total, 500.0);
        assert_eq!(b.system_cost, 1000.0);

        let b = evaluate_schedule(&inst, &two(2, 12)).unwrap();
        assert_eq!(b.consumers[0].total, 250.0);
        assert_eq!(b.consumers[1].energy_cost, 250.0);
        assert_eq!(b.consumers[1].inconvenience_cost, 300.0);
        assert_eq!(b.system_cost, 800.0);

        let b = evaluate_schedule(&inst, &two(2, 3)).unwrap();
        assert_eq!(b.consumers[1].energy_cost, 475.0);
        assert_eq!(b.consumers[1].total, 505.0);
    }

    #[test]
    fn window_violation_names_appliance() {
        let inst = example_instance_sec2();
        let err = evaluate_schedule(&inst, &two(2, 14)).unwrap_err();
        assert!(matches!(
            err,
            Error::WindowViolation { consumer: 1, appliance: 0, start: 14, .. }
        ));
        assert!(matches!(
            evaluate_schedule(&inst, &Schedule { start: vec![vec![2]] }),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn centralized_optimum_and_tie_break() {
        let inst = example_instance_sec2();
        let (s, b) = solve_centralized(&inst, &SearchBudget::default()).unwrap();
        assert_eq!(b.system_cost, 800.0);
        assert_eq!(s, two(0, 10));
    }

    #[test]
    fn budget_is_enforced() {
        let inst = example_instance_sec2();
        let err = solve_centralized(&inst, &SearchBudget { max_nodes: 195 }).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExceeded {
                required: 196,
                max_nodes: 195
            }
        );
    }

    #[test]
    fn single_consumer_flat_price_stays_at_pst() {
        let mut inst = example_instance_sec2();
        inst.consumers.truncate(1);
        inst.price_table = PriceTable::uniform(vec![PriceBand {
            volume_kw: None,
            price_per_kwh: 3.0,
        }]);
        let (s, b) = solve_centralized(&inst, &SearchBudget::default()).unwrap();
        assert_eq!(s.start, vec![vec![2]]);
        assert_eq!(b.consumers[0].inconvenience_cost, 0.0);
        let (br, c) = best_response(&inst, &s, 0, &SearchBudget::default()).unwrap();
        assert_eq!(br.start, vec![vec![2]]);
        assert_eq!(c, 150.0);
    }

    #[test]
    fn best_responses_in_worked_example() {
        let inst = example_instance_sec2();
        let budget = SearchBudget::default();
        let (s, c) = best_response(&inst, &two(2, 2), 1, &budget).unwrap();
        assert_eq!((s.start[1][0], c), (2, 500.0));
        let (s, c) = best_response(&inst, &two(5, 12), 0, &budget).unwrap();
        assert_eq!((s.start[0][0], c), (2, 250.0));
        assert_eq!(s.start[1], vec![12]);
    }

    #[test]
    fn cooperation_costs() {
        let inst = example_instance_sec2();
        let budget = SearchBudget::default();
        assert_eq!(cost_of_cooperation(&inst, &two(2, 12), 1, &budget).unwrap(), 50.0);
        assert_eq!(cost_of_cooperation(&inst, &two(2, 12), 0, &budget).unwrap(), 0.0);
        assert_eq!(cost_of_cooperation(&inst, &two(2, 2), 0, &budget).unwrap(), 0.0);
        assert_eq!(cost_of_cooperation(&inst, &two(2, 2), 1, &budget).unwrap(), 0.0);
    }

    #[test]
    fn stage_game_of_worked_example() {
        let inst = example_instance_sec2();
        let g = stage_game_from_instance(&inst, [12, 12]).unwrap();
        assert_eq!(g.cost(Action::Pst, Action::Pst), (500.0, 500.0));
        assert_eq!(g.cost(Action::Pst, Action::Away), (250.0, 550.0));
        assert_eq!(g.cost(Action::Away, Action::Pst), (550.0, 250.0));
        assert_eq!(g.cost(Action::Away, Action::Away), (800.0, 800.0));
        assert!((g.normalized_p().unwrap() - 0.2).abs() < 1e-12);
        assert!(g.is_minimal_form(1e-12));

        let mut three = inst.clone();
        three.consumers.push(three.consumers[0].clone());
        assert!(matches!(stage_game_from_instance(&three, [12, 12]), Err(Error::Shape(_))));
    }

    #[test]
    fn flat_free_instance_has_flat_table() {
        let mut inst = example_instance_sec2();
        inst.price_table = PriceTable::uniform(vec![PriceBand {
            volume_kw: None,
            price_per_kwh: 4.0,
        }]);
        for c in &mut inst.consumers {
            c.appliances[0].inconvenience_per_slot = 0.0;
        }
        let g = stage_game_from_instance(&inst, [12, 12]).unwrap();
        assert!(g.costs.iter().flatten().all(|&(a, b)| a == 200.0 && b == 200.0));
        assert_eq!(g.normalized_p(), None);
    }

    #[test]
    fn json_round_trip_and_pointers() {
        let inst = example_instance_sec2();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);

        let mut v: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        v["consumers"][1]["appliances"][0]["lst"] = 20.into();
        match Instance::from_json(&v.to_string()).unwrap_err() {
            Error::Parse { pointer, .. } => assert_eq!(pointer, "/consumers/1/appliances/0/lst"),
            e => panic!("{e}"),
        }
        v["consumers"][1]["appliances"][0]["duration"] = "ten".into();
        match Instance::from_json(&v.to_string()).unwrap_err() {
            Error::Parse { pointer, .. } => {
                assert_eq!(pointer, "/consumers/1/appliances/0/duration")
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn price_table_validation() {
        let mut inst = example_instance_sec2();
        inst.price_table.slots[0][0].price_per_kwh = 20.0;
        let err = Instance::from_json(&inst.to_json()).unwrap_err();
        assert!(matches!(err, Error::Parse { ref pointer, .. } if pointer == "/price_table/0/1/price_per_kwh"));

        let mut inst = example_instance_sec2();
        inst.price_table.slots[0][1].volume_kw = Some(50.0);
        assert!(Instance::from_json(&inst.to_json()).is_err());
    }

    #[test]
    fn series_csv_shape() {
        let inst = example_instance_sec2();
        let b = evaluate_schedule(&inst, &two(2, 3)).unwrap();
        let csv = b.slot_series_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 25);
        assert_eq!(lines[0], "slot,demand_kw,unit_price_per_kwh,consumer_0_kw,consumer_1_kw");
        assert_eq!(lines[4], "3,10,10,5,5");
    }
}
