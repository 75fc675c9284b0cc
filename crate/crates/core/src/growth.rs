//! Event-driven moat growing with a merge plan on the bidirected graph.
//!
//! The engine grows, for every active part S of the plan's partition, the
//! dual variable of U_S = {v reachable from S via tight directed edges} at
//! unit rate. Events are edge tightenings and partition changes; between
//! events every load is linear in t, so all event times are exact
//! rationals. Edge loads are kept implicitly as predicted tightening times
//! (rescheduled on every rate change), which keeps per-event work constant.
//!
//! The same engine also runs the continuous variant used for constructing
//! well-subdivided instances, where sets additionally contribute to edges
//! whose undirected total is not yet exhausted.

use crate::heap::RatHeap;
use crate::instance::{EdgeId, Instance, VertexId};
use crate::mergeplan::{times_in_instance_order, MergePlan, TermMask};
use crate::rat::Rat;
use crate::{Error, Result};
use std::collections::HashMap;

/// Directed edge id: `2*e` runs u -> v, `2*e + 1` runs v -> u.
pub type DirEdgeId = u32;

pub fn dir_forward(e: EdgeId) -> DirEdgeId {
    2 * e
}

pub fn dir_reverse(e: EdgeId) -> DirEdgeId {
    2 * e + 1
}

pub fn dir_underlying(d: DirEdgeId) -> EdgeId {
    d / 2
}

pub fn dir_sibling(d: DirEdgeId) -> DirEdgeId {
    d ^ 1
}

pub fn dir_endpoints(inst: &Instance, d: DirEdgeId) -> (VertexId, VertexId) {
    let e = inst.edge(dir_underlying(d));
    if d & 1 == 0 {
        (e.u, e.v)
    } else {
        (e.v, e.u)
    }
}

#[derive(Debug, Clone)]
pub struct GrowthOptions {
    /// record atf tables, parent pointers and contribution intervals
    pub record_trace: bool,
    /// record the event list
    pub record_events: bool,
    /// materialize the grown vertex sets in the dual solution
    pub record_dual_sets: bool,
    /// record per-edge loads at which the contributing family changes
    /// (used by well-subdivision)
    pub record_family_loads: bool,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions {
            record_trace: true,
            record_events: true,
            record_dual_sets: true,
            record_family_loads: false,
        }
    }
}

impl GrowthOptions {
    /// Cheapest configuration: dual objective and feasibility only.
    pub fn lean() -> Self {
        GrowthOptions {
            record_trace: false,
            record_events: false,
            record_dual_sets: false,
            record_family_loads: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    EdgeTight(DirEdgeId),
    /// number of active parts after the change
    PartitionChange(usize),
    /// a set reached a vertex
    Reach(TermMask, VertexId),
}

#[derive(Debug, Clone)]
pub struct Event {
    pub time: Rat,
    pub kind: EventKind,
}

/// Contribution of an active set to a directed edge over `(start, end]`.
#[derive(Debug, Clone)]
pub struct Contribution {
    pub set: TermMask,
    pub dir_edge: DirEdgeId,
    pub start: Rat,
    pub end: Rat,
}

/// Accumulated dual values keyed by grown vertex sets.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub root: VertexId,
    /// grown sets with positive dual value (empty unless requested)
    pub entries: Vec<(Vec<VertexId>, Rat)>,
    /// Σ y_U over U not containing the root
    pub objective: Rat,
}

/// Σ y_U over entries with r ∉ U and U ∩ R ≠ ∅ (grown sets always contain
/// a terminal, so only the root test matters).
pub fn dual_objective(dual: &DualSolution) -> Rat {
    dual.objective.clone()
}

/// Exact check of every directed-edge constraint of the dual LP.
/// Returns the violated directed edges (empty iff feasible).
pub fn verify_dual_feasibility(dual: &DualSolution, inst: &Instance) -> Vec<DirEdgeId> {
    let n = inst.vertex_count();
    let mut violated = Vec::new();
    let mut member: Vec<Vec<bool>> = Vec::with_capacity(dual.entries.len());
    for (set, _) in &dual.entries {
        let mut m = vec![false; n];
        for &v in set {
            m[v as usize] = true;
        }
        member.push(m);
    }
    for e in 0..inst.edge_count() as EdgeId {
        for d in [dir_forward(e), dir_reverse(e)] {
            let (tail, head) = dir_endpoints(inst, d);
            let mut load = Rat::ZERO;
            for (i, (_, y)) in dual.entries.iter().enumerate() {
                if member[i][tail as usize] && !member[i][head as usize] {
                    load += y;
                }
            }
            if load > inst.edge(e).cost {
                violated.push(d);
            }
        }
    }
    violated
}

/// First moment a dual variable for a root-containing set was grown for a
/// rootless part.
#[derive(Debug, Clone)]
pub struct FeasibilityViolation {
    pub time: Rat,
    pub set: TermMask,
}

#[derive(Debug, Clone)]
pub struct GrowthTrace {
    pub root: VertexId,
    /// final merge time (growth stops here)
    pub end_time: Rat,
    pub feasible: bool,
    pub violation: Option<FeasibilityViolation>,
    /// tightening time per directed edge
    pub tight_time: Vec<Option<Rat>>,
    /// first reach time per (terminal index, vertex); `None` without trace
    /// recording
    pub atf: Option<Vec<Vec<Option<Rat>>>>,
    /// parent directed edge per (terminal index, vertex)
    pub parents: Option<Vec<Vec<Option<DirEdgeId>>>>,
    pub contributions: Vec<Contribution>,
    pub events: Vec<Event>,
    pub terminal_count: usize,
}

pub fn is_feasible_run(trace: &GrowthTrace) -> (bool, Option<&FeasibilityViolation>) {
    (trace.feasible, trace.violation.as_ref())
}

impl GrowthTrace {
    fn atf_table(&self) -> Result<&Vec<Vec<Option<Rat>>>> {
        self.atf
            .as_ref()
            .ok_or_else(|| Error::InvalidPlan("trace was recorded without atf tables".into()))
    }

    /// atf_X(v): first time the terminal set X reaches v via tight edges.
    pub fn atf_set(&self, set: TermMask, v: VertexId) -> Result<Option<Rat>> {
        let table = self.atf_table()?;
        let mut best: Option<Rat> = None;
        for ti in 0..self.terminal_count {
            if set & (1 << ti) == 0 {
                continue;
            }
            if let Some(t) = &table[ti][v as usize] {
                best = match best {
                    None => Some(t.clone()),
                    Some(b) if *t < b => Some(t.clone()),
                    other => other,
                };
            }
        }
        Ok(best)
    }

    pub fn atf_all(&self, v: VertexId) -> Result<Option<Rat>> {
        self.atf_set((1u128 << self.terminal_count) - 1, v)
    }

    /// An S-tight path to `v`: atf_S is nondecreasing along it and each edge
    /// is tight by the time its head is reached.
    pub fn s_tight_path(
        &self,
        inst: &Instance,
        set: TermMask,
        v: VertexId,
    ) -> Result<Vec<VertexId>> {
        let table = self.atf_table()?;
        let parents = self
            .parents
            .as_ref()
            .ok_or_else(|| Error::InvalidPlan("trace has no parent pointers".into()))?;
        // the terminal of S that realizes atf_S(v)
        let mut pick: Option<(usize, Rat)> = None;
        for ti in 0..self.terminal_count {
            if set & (1 << ti) == 0 {
                continue;
            }
            if let Some(t) = &table[ti][v as usize] {
                match &pick {
                    None => pick = Some((ti, t.clone())),
                    Some((_, bt)) if t < bt => pick = Some((ti, t.clone())),
                    _ => {}
                }
            }
        }
        let (ti, _) = pick.ok_or_else(|| Error::Unreached(inst.name(v).to_string()))?;
        let mut path = vec![v];
        let mut cur = v;
        while let Some(d) = parents[ti][cur as usize] {
            let (tail, _) = dir_endpoints(inst, d);
            path.push(tail);
            cur = tail;
        }
        path.reverse();
        Ok(path)
    }

    /// Validates that `path` is S-tight in this trace.
    pub fn check_s_tight(&self, inst: &Instance, set: TermMask, path: &[VertexId]) -> Result<()> {
        if path.is_empty() {
            return Err(Error::NotTight("empty path".into()));
        }
        let start = path[0];
        let start_ti = inst.terminal_index(start).ok_or_else(|| {
            Error::NotTight(format!("path starts at non-terminal {}", inst.name(start)))
        })?;
        if set & (1 << start_ti) == 0 {
            return Err(Error::NotTight(format!(
                "path starts outside the set at {}",
                inst.name(start)
            )));
        }
        let mut prev_atf = Rat::ZERO;
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = inst
                .neighbors(a)
                .iter()
                .find(|(nb, _)| *nb == b)
                .map(|(_, e)| {
                    let edge = inst.edge(*e);
                    if edge.u == a {
                        dir_forward(*e)
                    } else {
                        dir_reverse(*e)
                    }
                })
                .ok_or_else(|| {
                    Error::NotTight(format!("no edge {} - {}", inst.name(a), inst.name(b)))
                })?;
            let atf_b = self
                .atf_set(set, b)?
                .ok_or_else(|| Error::Unreached(inst.name(b).to_string()))?;
            if atf_b < prev_atf {
                return Err(Error::NotTight(format!(
                    "atf decreases along the path at {}",
                    inst.name(b)
                )));
            }
            match &self.tight_time[d as usize] {
                Some(tt) if *tt <= atf_b => {}
                _ => {
                    return Err(Error::NotTight(format!(
                        "edge {} -> {} not tight at atf of its head",
                        inst.name(a),
                        inst.name(b)
                    )))
                }
            }
            prev_atf = atf_b;
        }
        Ok(())
    }

    /// First vertex on an S-tight `path` that the complement of S reaches no
    /// later than S itself; `None` when there is no interaction.
    pub fn meeting_point(
        &self,
        inst: &Instance,
        set: TermMask,
        path: &[VertexId],
    ) -> Result<Option<VertexId>> {
        self.check_s_tight(inst, set, path)?;
        let full: TermMask = (1u128 << self.terminal_count) - 1;
        let complement = full & !set;
        if complement == 0 {
            return Ok(None);
        }
        for &v in path {
            let atf_s = self.atf_set(set, v)?.expect("path vertices reached by S");
            if let Some(atf_c) = self.atf_set(complement, v)? {
                if atf_c <= atf_s {
                    return Ok(Some(v));
                }
            }
        }
        Ok(None)
    }

    /// Per tight directed edge: the distinct maximal sets that contributed
    /// to it or its reverse before it became tight. Edges are flagged when
    /// three pairwise-disjoint sets contributed, or when two contributors
    /// are disjoint from a set using the edge forward.
    pub fn safe_edge_report(&self) -> SafeEdgeReport {
        let mut by_edge: HashMap<DirEdgeId, Vec<(TermMask, Rat)>> = HashMap::new();
        for c in &self.contributions {
            by_edge
                .entry(c.dir_edge)
                .or_default()
                .push((c.set, c.start.clone()));
        }
        let mut flagged = Vec::new();
        let mut checked = 0usize;
        for (d, tight_at) in self.tight_time.iter().enumerate() {
            let d = d as DirEdgeId;
            let tight_at = match tight_at {
                Some(t) => t,
                None => continue,
            };
            checked += 1;
            let mut contributors: Vec<TermMask> = Vec::new();
            let mut forward_users: Vec<TermMask> = Vec::new();
            for source in [d, dir_sibling(d)] {
                if let Some(list) = by_edge.get(&source) {
                    for (set, start) in list {
                        if start < tight_at {
                            if !contributors.contains(set) {
                                contributors.push(*set);
                            }
                            if source == d && !forward_users.contains(set) {
                                forward_users.push(*set);
                            }
                        }
                    }
                }
            }
            // keep only inclusion-maximal sets (merged sets supersede parts)
            let maximal: Vec<TermMask> = contributors
                .iter()
                .copied()
                .filter(|&s| !contributors.iter().any(|&t| t != s && t & s == s))
                .collect();
            let mut count = 0;
            for (i, &a) in maximal.iter().enumerate() {
                let mut disj = 1;
                for &b in maximal.iter().skip(i + 1) {
                    if a & b == 0 {
                        disj += 1;
                    }
                }
                count = count.max(disj);
            }
            let disjoint3 = count >= 3;
            let mut foreign2 = false;
            for &user in &forward_users {
                let foreign = maximal.iter().filter(|&&s| s & user == 0).count();
                if foreign >= 2 {
                    foreign2 = true;
                }
            }
            if disjoint3 || foreign2 {
                flagged.push(FlaggedEdge {
                    dir_edge: d,
                    contributors: maximal,
                    disjoint3,
                    foreign2,
                });
            }
        }
        SafeEdgeReport {
            tight_edges_checked: checked,
            flagged,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlaggedEdge {
    pub dir_edge: DirEdgeId,
    pub contributors: Vec<TermMask>,
    pub disjoint3: bool,
    pub foreign2: bool,
}

#[derive(Debug, Clone)]
pub struct SafeEdgeReport {
    pub tight_edges_checked: usize,
    pub flagged: Vec<FlaggedEdge>,
}

// ---------------------------------------------------------------------------
// engine
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Standard,
    Continuous,
}

/// Additional outputs of a continuous run.
pub(crate) struct ContinuousExtras {
    /// undirected tightening time per edge
    pub u_tight_time: Vec<Option<Rat>>,
    /// directional loads (forward, reverse) at the undirected tightening
    pub u_snapshot: Vec<Option<(Rat, Rat)>>,
    /// final loads per directed edge at termination
    pub final_loads: Vec<Rat>,
}

pub(crate) struct EngineOutput {
    pub trace: GrowthTrace,
    pub dual: DualSolution,
    /// loads at which the contributing family of a directed edge changed
    pub family_loads: Vec<(DirEdgeId, Rat)>,
    pub continuous: Option<ContinuousExtras>,
}

struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet {
            words: vec![0; (n + 63) / 64],
        }
    }

    #[inline]
    fn get(&self, i: u32) -> bool {
        self.words[(i / 64) as usize] & (1 << (i % 64)) != 0
    }

    /// returns true when the bit was newly set
    #[inline]
    fn set(&mut self, i: u32) -> bool {
        let w = &mut self.words[(i / 64) as usize];
        let bit = 1 << (i % 64);
        if *w & bit != 0 {
            false
        } else {
            *w |= bit;
            true
        }
    }

    fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    fn ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros();
                    w &= w - 1;
                    Some(wi as u32 * 64 + b)
                }
            })
        })
    }
}

const ST_TIGHT: u8 = 1;
/// rate is zero but some load has accumulated; timeval holds the remainder
const ST_PARTIAL: u8 = 2;

struct Slot {
    members: TermMask,
    active: bool,
    has_root: bool,
    reach: BitSet,
    /// directed edges this slot ever contributed to
    touched: Vec<DirEdgeId>,
}

struct Engine<'a> {
    inst: &'a Instance,
    mode: Mode,
    opts: &'a GrowthOptions,
    root: VertexId,

    // per directed edge
    rate: Vec<u32>,
    flags: Vec<u8>,
    contributors: Vec<TermMask>,
    /// predicted tight time while in the heap; remaining cost when partial
    timeval: Vec<Rat>,
    tight_time: Vec<Option<Rat>>,

    // continuous mode, per undirected edge
    u_flags: Vec<u8>,
    u_timeval: Vec<Rat>,
    u_tight_time: Vec<Option<Rat>>,
    u_snapshot: Vec<Option<(Rat, Rat)>>,

    /// ids 0..2E are directed edges; in continuous mode ids 2E..3E are
    /// undirected tightness predictions
    heap: RatHeap,
    pending_tight: Vec<u32>,

    slots: Vec<Slot>,
    term_count: usize,

    // full-trace state
    term_reach: Vec<BitSet>,
    term_atf: Vec<Vec<Option<Rat>>>,
    term_parent: Vec<Vec<Option<DirEdgeId>>>,
    open_intervals: HashMap<(u32, DirEdgeId), (TermMask, Rat)>,
    contributions: Vec<Contribution>,
    events: Vec<Event>,

    family_loads: Vec<(DirEdgeId, Rat)>,

    objective: Rat,
    dual_sets: HashMap<Vec<VertexId>, Rat>,
    violation: Option<FeasibilityViolation>,
}

impl<'a> Engine<'a> {
    fn new(inst: &'a Instance, mode: Mode, opts: &'a GrowthOptions) -> Result<Self> {
        let n = inst.vertex_count();
        let n_dir = inst.edge_count() * 2;
        let n_und = if mode == Mode::Continuous {
            inst.edge_count()
        } else {
            0
        };
        let term_count = inst.terminals().len();
        if term_count > 128 {
            return Err(Error::TooLarge {
                what: "growth terminals",
                size: term_count,
                cap: 128,
            });
        }
        let trace = opts.record_trace;
        Ok(Engine {
            inst,
            mode,
            opts,
            root: inst.effective_root(),
            rate: vec![0; n_dir],
            flags: vec![0; n_dir],
            contributors: vec![0; n_dir],
            timeval: vec![Rat::ZERO; n_dir],
            tight_time: vec![None; n_dir],
            u_flags: vec![0; n_und],
            u_timeval: vec![Rat::ZERO; n_und],
            u_tight_time: vec![None; n_und],
            u_snapshot: vec![None; n_und],
            heap: RatHeap::new(n_dir + n_und),
            pending_tight: Vec::new(),
            slots: Vec::new(),
            term_count,
            term_reach: if trace {
                (0..term_count).map(|_| BitSet::new(n)).collect()
            } else {
                Vec::new()
            },
            term_atf: if trace {
                vec![vec![None; n]; term_count]
            } else {
                Vec::new()
            },
            term_parent: if trace {
                vec![vec![None; n]; term_count]
            } else {
                Vec::new()
            },
            open_intervals: HashMap::new(),
            contributions: Vec::new(),
            events: Vec::new(),
            family_loads: Vec::new(),
            objective: Rat::ZERO,
            dual_sets: HashMap::new(),
            violation: None,
        })
    }

    #[inline]
    fn cost_of(&self, d: DirEdgeId) -> &Rat {
        &self.inst.edge(dir_underlying(d)).cost
    }

    #[inline]
    fn is_tight(&self, d: DirEdgeId) -> bool {
        self.flags[d as usize] & ST_TIGHT != 0
    }

    /// load accumulated on `d` as of time `t`
    fn load_of(&self, d: DirEdgeId, t: &Rat) -> Rat {
        let i = d as usize;
        if self.flags[i] & ST_TIGHT != 0 {
            return self.cost_of(d).clone();
        }
        if self.rate[i] > 0 {
            let rem = (&self.timeval[i] - t) * Rat::from(self.rate[i]);
            return self.cost_of(d) - rem;
        }
        if self.flags[i] & ST_PARTIAL != 0 {
            return self.cost_of(d) - &self.timeval[i];
        }
        Rat::ZERO
    }

    fn remaining_of(&self, d: DirEdgeId, t: &Rat) -> Rat {
        self.cost_of(d) - self.load_of(d, t)
    }

    /// does `slot` currently contribute to `d`?
    fn contributes(&self, slot: usize, d: DirEdgeId) -> bool {
        if self.is_tight(d) {
            return false;
        }
        let (tail, head) = dir_endpoints(self.inst, d);
        if !self.slots[slot].reach.get(tail) {
            return false;
        }
        let head_in = self.slots[slot].reach.get(head);
        match self.mode {
            Mode::Standard => !head_in,
            Mode::Continuous => {
                !head_in || self.u_flags[dir_underlying(d) as usize] & ST_TIGHT == 0
            }
        }
    }

    fn record_family_change(&mut self, d: DirEdgeId, t: &Rat) {
        if !self.opts.record_family_loads {
            return;
        }
        let load = self.load_of(d, t);
        if load.is_positive() && load < *self.cost_of(d) {
            self.family_loads.push((d, load));
        }
    }

    /// reschedule `d` after its rate changed from `old_rate` at time `t`
    fn reschedule(&mut self, d: DirEdgeId, t: &Rat, old_rate: u32) {
        let i = d as usize;
        let new_rate = self.rate[i];
        if self.is_tight(d) {
            return;
        }
        let remaining = if old_rate > 0 {
            (&self.timeval[i] - t) * Rat::from(old_rate)
        } else if self.flags[i] & ST_PARTIAL != 0 {
            self.timeval[i].clone()
        } else {
            self.cost_of(d).clone()
        };
        if new_rate == 0 {
            if old_rate > 0 {
                self.heap.remove(d);
            }
            if remaining.is_zero() {
                self.flags[i] &= !ST_PARTIAL;
                self.pending_tight.push(d);
            } else if remaining < *self.cost_of(d) {
                self.flags[i] |= ST_PARTIAL;
                self.timeval[i] = remaining;
            } else {
                self.flags[i] &= !ST_PARTIAL;
            }
        } else {
            self.flags[i] &= !ST_PARTIAL;
            if remaining.is_zero() {
                self.heap.remove(d);
                self.pending_tight.push(d);
            } else {
                let predicted = t + remaining / Rat::from(new_rate);
                self.timeval[i] = predicted.clone();
                self.heap.set(d, predicted);
            }
        }
        if self.mode == Mode::Continuous {
            self.reschedule_undirected(dir_underlying(d), t);
        }
    }

    fn reschedule_undirected(&mut self, e: EdgeId, t: &Rat) {
        let i = e as usize;
        if self.u_flags[i] & ST_TIGHT != 0 {
            return;
        }
        let d0 = dir_forward(e);
        let d1 = dir_reverse(e);
        let u_rate = self.rate[d0 as usize] + self.rate[d1 as usize];
        let load = self.load_of(d0, t) + self.load_of(d1, t);
        let remaining = &self.inst.edge(e).cost - &load;
        let hid = (self.inst.edge_count() * 2) as u32 + e;
        if !remaining.is_positive() {
            debug_assert!(remaining.is_zero(), "undirected load overshoot");
            self.heap.remove(hid);
            self.pending_tight.push(hid);
            return;
        }
        if u_rate == 0 {
            self.heap.remove(hid);
        } else {
            let predicted = t + remaining / Rat::from(u_rate);
            self.u_timeval[i] = predicted.clone();
            self.heap.set(hid, predicted);
        }
    }

    fn set_bit(&mut self, slot: usize, d: DirEdgeId, t: &Rat) {
        let i = d as usize;
        debug_assert!(self.contributors[i] & (1 << slot) == 0);
        if self.contributors[i] != 0 {
            self.record_family_change(d, t);
        }
        let old = self.rate[i];
        self.contributors[i] |= 1 << slot;
        self.rate[i] += 1;
        self.slots[slot].touched.push(d);
        if self.opts.record_trace {
            self.open_intervals
                .insert((slot as u32, d), (self.slots[slot].members, t.clone()));
        }
        self.reschedule(d, t, old);
    }

    fn clear_bit(&mut self, slot: usize, d: DirEdgeId, t: &Rat) {
        let i = d as usize;
        debug_assert!(self.contributors[i] & (1 << slot) != 0);
        self.record_family_change(d, t);
        let old = self.rate[i];
        self.contributors[i] &= !(1u128 << slot);
        self.rate[i] -= 1;
        self.close_interval(slot, d, t);
        self.reschedule(d, t, old);
    }

    fn close_interval(&mut self, slot: usize, d: DirEdgeId, t: &Rat) {
        if !self.opts.record_trace {
            return;
        }
        if let Some((set, start)) = self.open_intervals.remove(&(slot as u32, d)) {
            if start < *t {
                self.contributions.push(Contribution {
                    set,
                    dir_edge: d,
                    start,
                    end: t.clone(),
                });
            }
        }
    }

    fn mark_tight(&mut self, d: DirEdgeId, t: &Rat) {
        let i = d as usize;
        if self.is_tight(d) {
            return;
        }
        debug_assert!(self.remaining_of(d, t).is_zero(), "tight with remainder");
        self.flags[i] |= ST_TIGHT;
        self.flags[i] &= !ST_PARTIAL;
        self.tight_time[i] = Some(t.clone());
        self.heap.remove(d);
        // contributors stop here; their reach grows via the BFS that follows
        let mask = self.contributors[i];
        if mask != 0 {
            let mut m = mask;
            while m != 0 {
                let slot = m.trailing_zeros() as usize;
                m &= m - 1;
                self.close_interval(slot, d, t);
            }
            self.contributors[i] = 0;
            self.rate[i] = 0;
        }
        if self.opts.record_events {
            self.events.push(Event {
                time: t.clone(),
                kind: EventKind::EdgeTight(d),
            });
        }
        if self.mode == Mode::Continuous {
            self.reschedule_undirected(dir_underlying(d), t);
        }
    }

    fn fire_undirected(&mut self, e: EdgeId, t: &Rat) {
        let i = e as usize;
        if self.u_flags[i] & ST_TIGHT != 0 {
            return;
        }
        self.u_flags[i] |= ST_TIGHT;
        self.u_tight_time[i] = Some(t.clone());
        let d0 = dir_forward(e);
        let d1 = dir_reverse(e);
        self.u_snapshot[i] = Some((self.load_of(d0, t), self.load_of(d1, t)));
        let hid = (self.inst.edge_count() * 2) as u32 + e;
        self.heap.remove(hid);
        // contributors whose head is already reached stop now
        for d in [d0, d1] {
            let mut m = self.contributors[d as usize];
            while m != 0 {
                let slot = m.trailing_zeros() as usize;
                m &= m - 1;
                if !self.contributes(slot, d) {
                    self.clear_bit(slot, d, t);
                }
            }
        }
    }

    /// slot's moat grows to cover `v`; updates rates on incident edges
    fn add_vertex_to_slot(&mut self, slot: usize, v: VertexId, t: &Rat) {
        if !self.slots[slot].reach.set(v) {
            return;
        }
        if v == self.root {
            self.slots[slot].has_root = true;
        }
        if self.opts.record_events {
            self.events.push(Event {
                time: t.clone(),
                kind: EventKind::Reach(self.slots[slot].members, v),
            });
        }
        let inst = self.inst;
        for &(_, e) in inst.neighbors(v) {
            let edge = inst.edge(e);
            let d_out = if edge.u == v {
                dir_forward(e)
            } else {
                dir_reverse(e)
            };
            let d_in = dir_sibling(d_out);
            // stop contributing into v
            if self.contributors[d_in as usize] & (1 << slot) != 0 && !self.contributes(slot, d_in)
            {
                self.clear_bit(slot, d_in, t);
            }
            // start contributing out of v
            if self.contributors[d_out as usize] & (1 << slot) == 0
                && self.contributes(slot, d_out)
            {
                self.set_bit(slot, d_out, t);
            }
        }
    }

    /// breadth-first closure of a slot's reach over tight edges, seeded by
    /// the given newly tight edges
    fn propagate_slot(&mut self, slot: usize, seeds: &[DirEdgeId], t: &Rat) {
        let mut queue: Vec<VertexId> = Vec::new();
        for &d in seeds {
            let (tail, head) = dir_endpoints(self.inst, d);
            if self.slots[slot].reach.get(tail) && !self.slots[slot].reach.get(head) {
                queue.push(head);
            }
        }
        while let Some(v) = queue.pop() {
            if self.slots[slot].reach.get(v) {
                continue;
            }
            self.add_vertex_to_slot(slot, v, t);
            let inst = self.inst;
            for &(w, e) in inst.neighbors(v) {
                let edge = inst.edge(e);
                let d_out = if edge.u == v {
                    dir_forward(e)
                } else {
                    dir_reverse(e)
                };
                if self.is_tight(d_out) && !self.slots[slot].reach.get(w) {
                    queue.push(w);
                }
            }
        }
    }

    /// same closure for a terminal's passive reach (atf and parent records)
    fn propagate_terminal(&mut self, ti: usize, seeds: &[DirEdgeId], t: &Rat) {
        let mut queue: Vec<(VertexId, DirEdgeId)> = Vec::new();
        for &d in seeds {
            let (tail, head) = dir_endpoints(self.inst, d);
            if self.term_reach[ti].get(tail) && !self.term_reach[ti].get(head) {
                queue.push((head, d));
            }
        }
        while let Some((v, via)) = queue.pop() {
            if !self.term_reach[ti].set(v) {
                continue;
            }
            self.term_atf[ti][v as usize] = Some(t.clone());
            self.term_parent[ti][v as usize] = Some(via);
            let inst = self.inst;
            for &(w, e) in inst.neighbors(v) {
                let edge = inst.edge(e);
                let d_out = if edge.u == v {
                    dir_forward(e)
                } else {
                    dir_reverse(e)
                };
                if self.is_tight(d_out) && !self.term_reach[ti].get(w) {
                    queue.push((w, d_out));
                }
            }
        }
    }

    /// drains and processes every tightening scheduled exactly at `t`
    fn process_instant(&mut self, t: &Rat) {
        let n_dir = (self.inst.edge_count() * 2) as u32;
        loop {
            let mut batch: Vec<u32> = Vec::new();
            while let Some((id, key)) = self.heap.peek() {
                if *key == *t {
                    batch.push(id);
                    self.heap.remove(id);
                } else {
                    debug_assert!(*key > *t, "missed an event");
                    break;
                }
            }
            batch.append(&mut self.pending_tight);
            if batch.is_empty() {
                return;
            }
            batch.sort_unstable();
            batch.dedup();
            // undirected tightness first, then directed in id order
            let mut newly_tight: Vec<DirEdgeId> = Vec::new();
            for &id in batch.iter().rev() {
                if id >= n_dir {
                    self.fire_undirected(id - n_dir, t);
                }
            }
            for &id in &batch {
                if id < n_dir {
                    self.mark_tight(id, t);
                    newly_tight.push(id);
                }
            }
            if newly_tight.is_empty() {
                continue;
            }
            for slot in 0..self.slots.len() {
                if self.slots[slot].active {
                    self.propagate_slot(slot, &newly_tight, t);
                }
            }
            if self.opts.record_trace {
                for ti in 0..self.term_count {
                    self.propagate_terminal(ti, &newly_tight, t);
                }
            }
        }
    }

    /// accumulates duals over the phase `(from, to]`
    fn accumulate(&mut self, from: &Rat, to: &Rat) {
        if to <= from {
            return;
        }
        let delta = to - from;
        let root_ti = self.root_terminal_index();
        let mut growing_without_root = 0u32;
        for slot in &self.slots {
            if !slot.active {
                continue;
            }
            if !slot.has_root {
                growing_without_root += 1;
            } else if slot.members & (1 << root_ti) == 0 && self.violation.is_none() {
                self.violation = Some(FeasibilityViolation {
                    time: from.clone(),
                    set: slot.members,
                });
            }
        }
        self.objective += &delta * Rat::from(growing_without_root);
        if self.opts.record_dual_sets {
            for slot in &self.slots {
                if !slot.active {
                    continue;
                }
                let key: Vec<VertexId> = slot.reach.ones().collect();
                *self.dual_sets.entry(key).or_insert(Rat::ZERO) += &delta;
            }
        }
    }

    fn root_terminal_index(&self) -> usize {
        self.inst
            .terminal_index(self.root)
            .expect("root is a terminal")
    }

    /// applies the partition change at `t`: active parts sharing a part of
    /// `next` are merged
    fn apply_partition(&mut self, next: &[TermMask], t: &Rat) {
        for &part in next {
            let group: Vec<usize> = (0..self.slots.len())
                .filter(|&s| self.slots[s].active && self.slots[s].members & part != 0)
                .collect();
            if group.len() <= 1 {
                continue;
            }
            let union_members: TermMask = group
                .iter()
                .map(|&s| self.slots[s].members)
                .fold(0, |a, b| a | b);
            debug_assert_eq!(union_members, part);
            let new_slot = union_members.trailing_zeros() as usize;
            debug_assert!(group.contains(&new_slot));
            let mut touched: Vec<DirEdgeId> = Vec::new();
            let mut reach = BitSet::new(self.inst.vertex_count());
            let mut has_root = false;
            for &s in &group {
                touched.append(&mut self.slots[s].touched);
                reach.union_with(&self.slots[s].reach);
                has_root |= self.slots[s].has_root;
                self.slots[s].active = false;
            }
            touched.sort_unstable();
            touched.dedup();
            let group_mask: TermMask = group.iter().fold(0, |m, &s| m | (1 << s));
            self.slots[new_slot] = Slot {
                members: union_members,
                active: true,
                has_root,
                reach,
                touched: Vec::new(),
            };
            for d in touched {
                let i = d as usize;
                let old_bits = self.contributors[i] & group_mask;
                if old_bits == 0 {
                    continue; // stale entry
                }
                // the family on this edge changes identity
                self.record_family_change(d, t);
                let old_rate = self.rate[i];
                let removed = old_bits.count_ones();
                let mut m = old_bits;
                while m != 0 {
                    let s = m.trailing_zeros() as usize;
                    m &= m - 1;
                    self.close_interval(s, d, t);
                }
                self.contributors[i] &= !group_mask;
                self.rate[i] -= removed;
                if self.contributes(new_slot, d) {
                    self.contributors[i] |= 1 << new_slot;
                    self.rate[i] += 1;
                    self.slots[new_slot].touched.push(d);
                    if self.opts.record_trace {
                        self.open_intervals
                            .insert((new_slot as u32, d), (union_members, t.clone()));
                    }
                }
                self.reschedule(d, t, old_rate);
            }
        }
        if self.opts.record_events {
            self.events.push(Event {
                time: t.clone(),
                kind: EventKind::PartitionChange(next.len()),
            });
        }
    }

    /// closes every open interval and records stop loads at termination
    fn finalize(&mut self, t: &Rat) {
        let mut open: Vec<(u32, DirEdgeId)> = self.open_intervals.keys().copied().collect();
        open.sort_unstable();
        for (slot, d) in open {
            self.close_interval(slot as usize, d, t);
        }
        if self.opts.record_family_loads {
            for d in 0..(self.inst.edge_count() * 2) as u32 {
                if self.contributors[d as usize] != 0 {
                    self.record_family_change(d, t);
                }
            }
        }
    }

    fn run(mut self, plan_inst: &MergePlan) -> Result<EngineOutput> {
        let tl = plan_inst.timeline().clone();
        let n = self.inst.vertex_count();

        // initial slots: the partition effective just after time 0
        let initial = tl.partitions[0].clone();
        self.slots = (0..self.term_count)
            .map(|_| Slot {
                members: 0,
                active: false,
                has_root: false,
                reach: BitSet::new(n),
                touched: Vec::new(),
            })
            .collect();
        let zero = Rat::ZERO;
        for &part in &initial {
            let slot = part.trailing_zeros() as usize;
            self.slots[slot].members = part;
            self.slots[slot].active = true;
            let mut m = part;
            while m != 0 {
                let ti = m.trailing_zeros() as usize;
                m &= m - 1;
                let v = self.inst.terminals()[ti];
                self.add_vertex_to_slot(slot, v, &zero);
            }
        }
        if self.opts.record_trace {
            for ti in 0..self.term_count {
                let v = self.inst.terminals()[ti];
                self.term_reach[ti].set(v);
                self.term_atf[ti][v as usize] = Some(Rat::ZERO);
            }
        }

        let mut next_partition = 1usize;
        let mut prev = Rat::ZERO;
        if initial.len() > 1 {
            loop {
                let next_tau = if next_partition < tl.partitions.len() {
                    Some(tl.times[next_partition - 1].clone())
                } else {
                    None
                };
                let next_tight = self.heap.peek().map(|(_, k)| k.clone());
                let t_next = match (&next_tau, &next_tight) {
                    (Some(tau), Some(tt)) => tau.clone().min(tt.clone()),
                    (Some(tau), None) => tau.clone(),
                    (None, _) => break,
                };
                self.accumulate(&prev, &t_next);
                self.process_instant(&t_next);
                if next_tau.map(|tau| tau == t_next).unwrap_or(false) {
                    let parts = tl.partitions[next_partition].clone();
                    if parts.len() == 1 {
                        self.finalize(&t_next);
                        if self.opts.record_events {
                            self.events.push(Event {
                                time: t_next.clone(),
                                kind: EventKind::PartitionChange(1),
                            });
                        }
                        prev = t_next;
                        break;
                    }
                    self.apply_partition(&parts, &t_next);
                    next_partition += 1;
                }
                prev = t_next;
            }
        } else {
            self.finalize(&Rat::ZERO);
        }
        let end_time = prev;

        let feasible = self.violation.is_none();
        let mut entries: Vec<(Vec<VertexId>, Rat)> = std::mem::take(&mut self.dual_sets)
            .into_iter()
            .collect();
        entries.sort();
        let dual = DualSolution {
            root: self.root,
            entries,
            objective: std::mem::take(&mut self.objective),
        };
        let continuous = if self.mode == Mode::Continuous {
            let final_loads = (0..(self.inst.edge_count() * 2) as u32)
                .map(|d| self.load_of(d, &end_time))
                .collect();
            Some(ContinuousExtras {
                u_tight_time: self.u_tight_time,
                u_snapshot: self.u_snapshot,
                final_loads,
            })
        } else {
            None
        };
        let trace = GrowthTrace {
            root: self.root,
            end_time,
            feasible,
            violation: self.violation,
            tight_time: self.tight_time,
            atf: if self.opts.record_trace {
                Some(self.term_atf)
            } else {
                None
            },
            parents: if self.opts.record_trace {
                Some(self.term_parent)
            } else {
                None
            },
            contributions: self.contributions,
            events: self.events,
            terminal_count: self.term_count,
        };
        Ok(EngineOutput {
            trace,
            dual,
            family_loads: self.family_loads,
            continuous,
        })
    }
}

pub(crate) fn run_engine(
    inst: &Instance,
    plan: &MergePlan,
    mode: Mode,
    opts: &GrowthOptions,
) -> Result<EngineOutput> {
    let names: Vec<String> = inst
        .terminals()
        .iter()
        .map(|&t| inst.name(t).to_string())
        .collect();
    let times = times_in_instance_order(plan, inst)?;
    let plan_inst = MergePlan::new(names, times)?;
    let engine = Engine::new(inst, mode, opts)?;
    engine.run(&plan_inst)
}

/// Runs the moat-growing simulation, producing the full trace and the dual
/// solution.
pub fn run(inst: &Instance, plan: &MergePlan) -> Result<(GrowthTrace, DualSolution)> {
    run_with(inst, plan, &GrowthOptions::default())
}

pub fn run_with(
    inst: &Instance,
    plan: &MergePlan,
    opts: &GrowthOptions,
) -> Result<(GrowthTrace, DualSolution)> {
    let out = run_engine(inst, plan, Mode::Standard, opts)?;
    Ok((out.trace, out.dual))
}
