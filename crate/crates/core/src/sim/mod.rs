//! Deterministic cellular environment: traffic dispatch onto active stations
//! by minimum-cost flow, the per-slot cost model, and the transition step.

pub mod flow;
pub mod topology;

pub use topology::{build_topology, BaseStation, BsSpec, CapacityRule, GridDims, NetworkTopology, TopologySpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::{Scaler, TrafficFrame};
use crate::Real;

/// Per-station active/sleep bits (true = active).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SleepAction(Vec<bool>);

impl SleepAction {
    pub fn all_active(n: usize) -> Self {
        SleepAction(vec![true; n])
    }

    pub fn all_sleep(n: usize) -> Self {
        SleepAction(vec![false; n])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        SleepAction(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_active(&self, bs: usize) -> bool {
        self.0[bs]
    }

    pub fn set(&mut self, bs: usize, active: bool) {
        self.0[bs] = active;
    }

    pub fn active_count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    /// Number of stations whose mode differs from `prev`.
    pub fn toggles_from(&self, prev: &SleepAction) -> usize {
        self.0
            .iter()
            .zip(prev.0.iter())
            .filter(|(a, b)| a != b)
            .count()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyParams {
    /// Fixed draw of an active station, W.
    pub p_fixed: Real,
    /// Load-proportional coefficient, W at full utilization.
    pub p_load: Real,
    /// Draw of a sleeping station, W.
    pub sleep_power: Real,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            p_fixed: 160.0,
            p_load: 216.0,
            sleep_power: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimParams {
    pub energy: EnergyParams,
    /// QoS delay penalty, W/s.
    pub beta_delay: Real,
    /// Cost of one sleep-to-active toggle, uniform across stations.
    pub beta_switch: Real,
    /// Transmission delay per unit traffic per grid-width of distance, s.
    pub delay_coeff: Real,
    /// Utilization cap `u`: dispatch never loads a station past `u * C_i`.
    pub util_cap: Real,
    /// Cost per unit of unserved traffic; derived from the topology when
    /// absent (10x the largest per-unit routing cost).
    pub overflow_penalty: Option<Real>,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            energy: EnergyParams::default(),
            beta_delay: 50.0,
            beta_switch: 100.0,
            delay_coeff: 0.01,
            util_cap: 0.95,
            overflow_penalty: None,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.util_cap > 0.0 && self.util_cap < 1.0) {
            return Err(Error::Config(format!(
                "util_cap must lie in (0,1), got {}",
                self.util_cap
            )));
        }
        if self.beta_delay < 0.0 || self.beta_switch < 0.0 || self.delay_coeff < 0.0 {
            return Err(Error::Config("cost coefficients must be non-negative".into()));
        }
        Ok(())
    }

    pub fn overflow_penalty_for(&self, topo: &NetworkTopology) -> Real {
        self.overflow_penalty
            .unwrap_or_else(|| 10.0 * self.delay_coeff * topo.max_covering_dist().max(1.0))
    }

    /// Per-station switching prices (uniform `beta_switch`).
    pub fn switch_prices(&self, n: usize) -> Vec<Real> {
        vec![self.beta_switch; n]
    }
}

/// Outcome of routing one frame onto the active stations.
#[derive(Clone, Debug)]
pub struct DispatchResult {
    /// Per grid: (station, amount) pairs.
    pub flows: Vec<Vec<(usize, Real)>>,
    /// Per station load.
    pub loads: Vec<Real>,
    /// Total transmission delay, s.
    pub tran_delay: Real,
    /// Traffic no active covering station could absorb.
    pub unserved: Real,
    /// Flow objective: routing delay plus overflow penalty charges.
    pub objective: Real,
}

/// Route `frame` onto the stations `action` keeps active: minimum-cost flow
/// on the bipartite grid/station graph with an overflow sink, station node
/// capacity `u * C_i`, and edge cost `delay_coeff * distance`.
pub fn dispatch_traffic(
    frame: &TrafficFrame,
    action: &SleepAction,
    topo: &NetworkTopology,
    params: &SimParams,
) -> Result<DispatchResult> {
    let n_grids = topo.n_grids();
    let n_bs = topo.n_stations();
    if frame.n_grids() != n_grids {
        return Err(Error::Argument(format!(
            "frame has {} grids, topology {}",
            frame.n_grids(),
            n_grids
        )));
    }
    if action.len() != n_bs {
        return Err(Error::Argument(format!(
            "action has {} stations, topology {}",
            action.len(),
            n_bs
        )));
    }

    let demand = frame.flat();
    let overflow_penalty = params.overflow_penalty_for(topo);

    // nodes: 0 source, 1..=G grids, G+1..=G+B stations, G+B+1 overflow, G+B+2 sink
    let source = 0;
    let grid_node = |g: usize| 1 + g;
    let bs_node = |b: usize| 1 + n_grids + b;
    let overflow_node = 1 + n_grids + n_bs;
    let sink = overflow_node + 1;

    let mut g = flow::MinCostFlow::new(sink + 1);
    let mut grid_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_grids];
    let total_demand: Real = demand.iter().sum();

    for (gi, &d) in demand.iter().enumerate() {
        if d > 0.0 {
            g.add_edge(source, grid_node(gi), d, 0.0);
            for &bs in topo.covered_by(gi) {
                if action.is_active(bs) {
                    let eid = g.add_edge(
                        grid_node(gi),
                        bs_node(bs),
                        Real::INFINITY,
                        params.delay_coeff * topo.dist(gi, bs),
                    );
                    grid_edges[gi].push((bs, eid));
                }
            }
            g.add_edge(grid_node(gi), overflow_node, Real::INFINITY, overflow_penalty);
        }
    }
    for bs in 0..n_bs {
        if action.is_active(bs) {
            g.add_edge(bs_node(bs), sink, params.util_cap * topo.capacity(bs), 0.0);
        }
    }
    g.add_edge(overflow_node, sink, Real::INFINITY, 0.0);

    let (routed, objective) = g.run(source, sink);
    debug_assert!(routed <= total_demand + 1e-6);

    let mut flows = vec![Vec::new(); n_grids];
    let mut loads = vec![0.0; n_bs];
    let mut tran_delay = 0.0;
    let mut served_total = 0.0;
    for (gi, edges) in grid_edges.iter().enumerate() {
        let mut served_g = 0.0;
        for &(bs, eid) in edges {
            let f = g.flow_on(eid).max(0.0);
            if f > 0.0 {
                flows[gi].push((bs, f));
                loads[bs] += f;
                tran_delay += f * params.delay_coeff * topo.dist(gi, bs);
                served_g += f;
            }
        }
        served_total += served_g.min(demand[gi]);
    }
    // conservation by construction: whatever was not served overflows
    let unserved = (total_demand - served_total).max(0.0);

    for bs in 0..n_bs {
        let cap = params.util_cap * topo.capacity(bs);
        if loads[bs] > cap + 1e-6 {
            return Err(Error::Argument(format!(
                "dispatch overloaded station {bs}: {} > {cap}",
                loads[bs]
            )));
        }
        loads[bs] = loads[bs].min(cap);
    }

    Ok(DispatchResult {
        flows,
        loads,
        tran_delay,
        unserved,
        objective,
    })
}

/// Sum of average queueing delays `1/(C_i - rho_i)` over active stations.
/// Loads must respect the utilization cap; a violation is a contract breach.
pub fn service_delay_cost(loads: &[Real], action: &SleepAction, topo: &NetworkTopology) -> Real {
    let mut total = 0.0;
    for bs in 0..topo.n_stations() {
        if !action.is_active(bs) {
            continue;
        }
        let c = topo.capacity(bs);
        let rho = loads[bs];
        assert!(
            rho < c,
            "service delay is singular: station {bs} load {rho} >= capacity {c}"
        );
        total += 1.0 / (c - rho);
    }
    total
}

/// Per-station power draw and the total. Active stations draw
/// `P_f + P_l * (rho/C)`; sleeping stations draw the sleep power.
pub fn energy_cost(
    loads: &[Real],
    action: &SleepAction,
    topo: &NetworkTopology,
    energy: &EnergyParams,
) -> (Vec<Real>, Real) {
    let per_bs: Vec<Real> = (0..topo.n_stations())
        .map(|bs| {
            if action.is_active(bs) {
                energy.p_fixed + energy.p_load * (loads[bs] / topo.capacity(bs))
            } else {
                energy.sleep_power
            }
        })
        .collect();
    let total = per_bs.iter().sum();
    (per_bs, total)
}

/// Charged only on sleep-to-active transitions.
pub fn switching_cost(prev: &SleepAction, action: &SleepAction, beta_switch: &[Real]) -> Result<Real> {
    if prev.len() != action.len() || beta_switch.len() != action.len() {
        return Err(Error::Argument(format!(
            "action lengths differ: prev {}, new {}, prices {}",
            prev.len(),
            action.len(),
            beta_switch.len()
        )));
    }
    Ok(prev
        .bits()
        .iter()
        .zip(action.bits())
        .zip(beta_switch)
        .filter(|((p, a), _)| !**p && **a)
        .map(|(_, price)| *price)
        .sum())
}

/// Per-slot cost decomposition. `total = energy + qos + switching` where
/// `qos = beta_delay * (tran + ser) + overflow_penalty * unserved`.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub energy: Real,
    pub tran_delay: Real,
    pub ser_delay: Real,
    pub qos: Real,
    pub switching: Real,
    pub unserved: Real,
    pub total: Real,
}

/// One environment transition: dispatch the realized traffic, then assemble
/// the cost. Decisions are made on predictions; costs are charged on the
/// actual frame.
pub fn step(
    prev_action: &SleepAction,
    action: &SleepAction,
    actual: &TrafficFrame,
    topo: &NetworkTopology,
    params: &SimParams,
) -> Result<(CostBreakdown, DispatchResult)> {
    let dispatch = dispatch_traffic(actual, action, topo, params)?;
    let ser_delay = service_delay_cost(&dispatch.loads, action, topo);
    let (_, energy) = energy_cost(&dispatch.loads, action, topo, &params.energy);
    let switching = switching_cost(prev_action, action, &params.switch_prices(topo.n_stations()))?;
    let overflow_penalty = params.overflow_penalty_for(topo);
    let qos = params.beta_delay * (dispatch.tran_delay + ser_delay)
        + overflow_penalty * dispatch.unserved;
    let total = energy + qos + switching;
    Ok((
        CostBreakdown {
            energy,
            tran_delay: dispatch.tran_delay,
            ser_delay,
            qos,
            switching,
            unserved: dispatch.unserved,
            total,
        },
        dispatch,
    ))
}

/// Agent-facing state: the predicted frame plus the previous action,
/// `N + B` dimensional once vectorized.
#[derive(Clone, Debug)]
pub struct SystemState {
    pub predicted: TrafficFrame,
    pub prev_action: SleepAction,
}

impl SystemState {
    pub fn dims(&self) -> usize {
        self.predicted.n_grids() + self.prev_action.len()
    }

    /// Flat vector: traffic normalized by the scaler, then action bits.
    pub fn to_vector(&self, scaler: &Scaler) -> Vec<Real> {
        let mut v = Vec::with_capacity(self.dims());
        v.extend(self.predicted.flat().iter().map(|&t| scaler.normalize_value(t)));
        v.extend(self.prev_action.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }));
        v
    }
}
