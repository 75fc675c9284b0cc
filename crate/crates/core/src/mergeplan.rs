//! Merge plans: time-indexed nested partitions of the terminal set.
//!
//! A plan is stored canonically as a symmetric matrix of merge times whose
//! entries satisfy the ultrametric condition (equivalent to a nested
//! partition family). Terminals are identified by name so a plan can be
//! carried across subdivided or contracted versions of an instance.

use crate::instance::{for_each_subset_of_size, Instance, VertexId};
use crate::rat::Rat;
use crate::{Error, Result};
use std::sync::OnceLock;

/// Bitmask over terminal indices (supports up to 128 terminals).
pub type TermMask = u128;

pub struct MergePlan {
    terminals: Vec<String>,
    /// flat n*n symmetric matrix
    times: Vec<Rat>,
    timeline: OnceLock<Timeline>,
}

impl Clone for MergePlan {
    fn clone(&self) -> Self {
        MergePlan {
            terminals: self.terminals.clone(),
            times: self.times.clone(),
            timeline: OnceLock::new(),
        }
    }
}

/// Partition history derived from the merge-time matrix.
///
/// `partitions[i]` is the active partition on the interval
/// `(times[i-1], times[i]]` (with an implicit time 0 before `times[0]`);
/// `partitions.last()` is the single-set partition reached after the final
/// merge.
#[derive(Debug, Clone)]
pub struct Timeline {
    /// strictly increasing positive merge times
    pub times: Vec<Rat>,
    /// `times.len() + 1` partitions, each a sorted list of disjoint masks
    pub partitions: Vec<Vec<TermMask>>,
}

/// Symmetric upper bound on merge times, keyed like a plan.
#[derive(Debug, Clone)]
pub struct UpperBound {
    pub terminals: Vec<String>,
    pub values: Vec<Rat>,
}

impl UpperBound {
    pub fn new(terminals: Vec<String>, values: Vec<Rat>) -> Result<Self> {
        let n = terminals.len();
        if values.len() != n * n {
            return Err(Error::InvalidPlan(format!(
                "upper bound matrix has {} entries for {} terminals",
                values.len(),
                n
            )));
        }
        for i in 0..n {
            if !values[i * n + i].is_zero() {
                return Err(Error::InvalidPlan("nonzero diagonal".into()));
            }
            for j in 0..n {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::InvalidPlan("asymmetric upper bound".into()));
                }
                if values[i * n + j].is_negative() {
                    return Err(Error::InvalidPlan("negative upper bound".into()));
                }
            }
        }
        Ok(UpperBound { terminals, values })
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.values[i * self.terminals.len() + j]
    }

    /// Half the terminal metric of `inst`: the upper bound whose maximal
    /// plan is the canonical merge plan.
    pub fn half_metric(inst: &Instance) -> Self {
        Self::scaled_metric(inst, &Rat::new(1, 2))
    }

    pub fn scaled_metric(inst: &Instance, factor: &Rat) -> Self {
        let terms = inst.terminals();
        let n = terms.len();
        let names: Vec<String> = terms.iter().map(|&t| inst.name(t).to_string()).collect();
        let mut values = vec![Rat::ZERO; n * n];
        for i in 0..n {
            let row = inst.dist_row(terms[i]);
            for j in 0..n {
                if i != j {
                    let d = row[terms[j] as usize].clone().expect("terminals connected");
                    values[i * n + j] = d * factor.clone();
                }
            }
        }
        UpperBound {
            terminals: names,
            values,
        }
    }
}

impl MergePlan {
    /// Validates symmetry, zero diagonal, non-negativity and the ultrametric
    /// condition.
    pub fn new(terminals: Vec<String>, times: Vec<Rat>) -> Result<Self> {
        let n = terminals.len();
        if n == 0 {
            return Err(Error::InvalidPlan("no terminals".into()));
        }
        if n > 128 {
            return Err(Error::TooLarge {
                what: "merge plan terminals",
                size: n,
                cap: 128,
            });
        }
        if times.len() != n * n {
            return Err(Error::InvalidPlan(format!(
                "matrix has {} entries for {} terminals",
                times.len(),
                n
            )));
        }
        for i in 0..n {
            if !times[i * n + i].is_zero() {
                return Err(Error::InvalidPlan(format!(
                    "merge_time({t}, {t}) != 0",
                    t = terminals[i]
                )));
            }
            for j in (i + 1)..n {
                if times[i * n + j] != times[j * n + i] {
                    return Err(Error::InvalidPlan("asymmetric merge times".into()));
                }
                if times[i * n + j].is_negative() {
                    return Err(Error::InvalidPlan("negative merge time".into()));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let ij = &times[i * n + j];
                    let ik = &times[i * n + k];
                    let kj = &times[k * n + j];
                    if *ij > ik.clone().max(kj.clone()) {
                        return Err(Error::NotUltrametric(
                            terminals[i].clone(),
                            terminals[j].clone(),
                            terminals[k].clone(),
                        ));
                    }
                }
            }
        }
        Ok(MergePlan {
            terminals,
            times,
            timeline: OnceLock::new(),
        })
    }

    /// Plan with zero merge times (everything merged immediately).
    pub fn trivial(terminals: Vec<String>) -> Self {
        let n = terminals.len();
        MergePlan {
            terminals,
            times: vec![Rat::ZERO; n * n],
            timeline: OnceLock::new(),
        }
    }

    /// The maximal-value plan among all plans upper bounded by `u`:
    /// merge(x,y) = min over x-y paths of the max edge of `u`, realized by
    /// path maxima on a minimum spanning tree under `u`.
    pub fn from_upper_bound(u: &UpperBound) -> Self {
        let n = u.terminals.len();
        if n <= 1 {
            return MergePlan::trivial(u.terminals.clone());
        }
        // Kruskal with lexicographic tie-breaking
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        edges.sort_by(|a, b| u.get(a.0, a.1).cmp(u.get(b.0, b.1)).then(a.cmp(b)));
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let mut tree: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); n];
        let mut picked = 0;
        for (i, j) in edges {
            let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
            if ri != rj {
                uf[ri] = rj;
                tree[i].push((j, u.get(i, j).clone()));
                tree[j].push((i, u.get(i, j).clone()));
                picked += 1;
                if picked == n - 1 {
                    break;
                }
            }
        }
        // merge(x,y) = max edge on the tree path
        let mut times = vec![Rat::ZERO; n * n];
        for start in 0..n {
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut stack: Vec<(usize, Rat)> = vec![(start, Rat::ZERO)];
            while let Some((v, maxv)) = stack.pop() {
                for (w, c) in &tree[v] {
                    if !seen[*w] {
                        seen[*w] = true;
                        let m = maxv.clone().max(c.clone());
                        times[start * n + w] = m.clone();
                        stack.push((*w, m));
                    }
                }
            }
        }
        MergePlan {
            terminals: u.terminals.clone(),
            times,
            timeline: OnceLock::new(),
        }
    }

    /// The canonical merge plan of an instance: maximal value subject to
    /// merge(x,y) <= dist(x,y)/2.
    pub fn canonical(inst: &Instance) -> Self {
        Self::from_upper_bound(&UpperBound::half_metric(inst))
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.terminals
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn merge_time(&self, i: usize, j: usize) -> &Rat {
        &self.times[i * self.terminals.len() + j]
    }

    pub fn times(&self) -> &[Rat] {
        &self.times
    }

    pub fn max_merge_time(&self) -> Rat {
        self.times.iter().max().cloned().unwrap_or(Rat::ZERO)
    }

    /// Scales every merge time by `factor` (> 0).
    pub fn scale(&self, factor: &Rat) -> Self {
        assert!(factor.is_positive(), "scale factor must be positive");
        MergePlan {
            terminals: self.terminals.clone(),
            times: self.times.iter().map(|t| t * factor).collect(),
            timeline: OnceLock::new(),
        }
    }

    /// Partition of the terminal set at time `t`: terminals stay in
    /// different parts while 0 <= t <= merge(x,y), so the parts are the
    /// components of the graph with edges {merge < t}.
    pub fn partition_at(&self, t: &Rat) -> Vec<TermMask> {
        self.partition_where(|m| m < t)
    }

    fn partition_where<F: Fn(&Rat) -> bool>(&self, joined: F) -> Vec<TermMask> {
        let n = self.terminals.len();
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if joined(self.merge_time(i, j)) {
                    let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
                    if ri != rj {
                        uf[ri] = rj;
                    }
                }
            }
        }
        let mut parts: Vec<TermMask> = vec![0; n];
        for i in 0..n {
            let r = find(&mut uf, i);
            parts[r] |= 1u128 << i;
        }
        parts.retain(|&m| m != 0);
        parts.sort_unstable();
        parts
    }

    /// The cached partition history.
    pub fn timeline(&self) -> &Timeline {
        self.timeline.get_or_init(|| {
            let mut times: Vec<Rat> = self
                .times
                .iter()
                .filter(|t| t.is_positive())
                .cloned()
                .collect();
            times.sort();
            times.dedup();
            let mut partitions = Vec::with_capacity(times.len() + 1);
            partitions.push(self.partition_where(|m| *m <= Rat::ZERO));
            for t in &times {
                partitions.push(self.partition_where(|m| m <= t));
            }
            Timeline { times, partitions }
        })
    }

    /// value(M) = ∫ (|S^t| - 1) dt, as a finite sum over the breakpoints.
    pub fn value(&self) -> Rat {
        let tl = self.timeline();
        let mut total = Rat::ZERO;
        let mut prev = Rat::ZERO;
        for (i, t) in tl.times.iter().enumerate() {
            let parts = tl.partitions[i].len();
            total += (t - &prev) * Rat::from((parts - 1) as u32);
            prev = t.clone();
        }
        total
    }

    /// Local value for X: ∫ (|{S ∈ S^t : S ∩ X ≠ ∅}| - 1) dt.
    pub fn local_value(&self, x: TermMask) -> Rat {
        assert!(x != 0, "local value of the empty set");
        let tl = self.timeline();
        let mut total = Rat::ZERO;
        let mut prev = Rat::ZERO;
        for (i, t) in tl.times.iter().enumerate() {
            let hit = tl.partitions[i].iter().filter(|&&p| p & x != 0).count();
            total += (t - &prev) * Rat::from((hit - 1) as u32);
            prev = t.clone();
        }
        total
    }

    /// Contracted plan M/X on R/X: parts meeting X are combined; the
    /// contracted terminal keeps the lexicographically smallest name in X.
    pub fn contract_plan(&self, x: TermMask) -> Result<Self> {
        if x == 0 {
            return Err(Error::EmptySubset);
        }
        let n = self.terminals.len();
        let members: Vec<usize> = (0..n).filter(|&i| x & (1 << i) != 0).collect();
        let rep_name = members
            .iter()
            .map(|&i| self.terminals[i].clone())
            .min()
            .expect("nonempty");
        // first time a's part meets X
        let meet: Vec<Rat> = (0..n)
            .map(|a| {
                members
                    .iter()
                    .map(|&m| self.merge_time(a, m).clone())
                    .min()
                    .unwrap_or(Rat::ZERO)
            })
            .collect();
        let keep: Vec<usize> = (0..n)
            .filter(|&i| x & (1 << i) == 0 || self.terminals[i] == rep_name)
            .collect();
        let k = keep.len();
        let mut names = Vec::with_capacity(k);
        for &i in &keep {
            names.push(self.terminals[i].clone());
        }
        let mut times = vec![Rat::ZERO; k * k];
        for a in 0..k {
            for b in 0..k {
                if a == b {
                    continue;
                }
                let (ia, ib) = (keep[a], keep[b]);
                let in_a = x & (1 << ia) != 0;
                let in_b = x & (1 << ib) != 0;
                let t = if in_a {
                    meet[ib].clone()
                } else if in_b {
                    meet[ia].clone()
                } else {
                    self.merge_time(ia, ib)
                        .clone()
                        .min(meet[ia].clone().max(meet[ib].clone()))
                };
                times[a * k + b] = t;
            }
        }
        MergePlan::new(names, times)
    }

    /// Random ultrametric plan: a random binary dendrogram with strictly
    /// increasing merge heights in (0, max_time], as multiples of 1/60.
    pub fn random_ultrametric<R: rand::Rng>(
        terminals: Vec<String>,
        rng: &mut R,
        max_time: &Rat,
    ) -> Self {
        let n = terminals.len();
        if n <= 1 {
            return MergePlan::trivial(terminals);
        }
        let steps = (n - 1) as i64;
        let denom = 60i64;
        let max_units = {
            let u = max_time * Rat::int(denom);
            let f = u.to_f64().floor() as i64;
            f.max(steps)
        };
        let mut units: Vec<i64> = Vec::new();
        while units.len() < steps as usize {
            let v = rng.gen_range(1..=max_units);
            if !units.contains(&v) {
                units.push(v);
            }
        }
        units.sort_unstable();
        let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut times = vec![Rat::ZERO; n * n];
        for h in units {
            let a = rng.gen_range(0..groups.len());
            let mut b = rng.gen_range(0..groups.len() - 1);
            if b >= a {
                b += 1;
            }
            let (ga, gb) = (groups[a].clone(), groups[b].clone());
            let t = Rat::new(h, denom);
            for &i in &ga {
                for &j in &gb {
                    times[i * n + j] = t.clone();
                    times[j * n + i] = t.clone();
                }
            }
            let mut merged = ga;
            merged.extend(gb);
            groups.remove(a.max(b));
            groups.remove(a.min(b));
            groups.push(merged);
        }
        MergePlan::new(terminals, times).expect("dendrogram is ultrametric")
    }
}

/// Goodness classification of a plan against an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaVerdict {
    StrictlyGood,
    Good,
    Bad,
}

#[derive(Debug, Clone)]
pub struct GammaReport {
    pub verdict: GammaVerdict,
    /// all terminal subsets were enumerated (|R| <= subset_cap)
    pub exhaustive: bool,
    pub subset_cap: usize,
    /// pair violating merge(x,y) <= (7-5γ)/12 · dist(x,y), if any
    pub pair_witness: Option<(String, String)>,
    /// γ-cheap set with no early-merged pair, if any
    pub cheap_set_witness: Option<Vec<String>>,
    pub cheap_sets_seen: usize,
}

/// Checks γ-goodness: every pair satisfies
/// merge(x,y) <= (7-5γ)/12 · dist(x,y), and every γ-cheap terminal set
/// (cost(X) < (1-γ) · 12/(7-5γ) · local_value(X)) contains a pair with
/// merge(x,y) <= (7-5γ)/(18-14γ) · dist(x,y). The strict verdict requires
/// the strict versions of both inequalities.
pub fn classify_gamma(
    plan: &MergePlan,
    inst: &Instance,
    gamma: &Rat,
    subset_cap: usize,
) -> Result<GammaReport> {
    if gamma.is_negative() || *gamma > Rat::new(1, 5) {
        return Err(Error::GammaRange(gamma.clone()));
    }
    let n = plan.len();
    let term_ids: Vec<VertexId> = plan
        .terminals()
        .iter()
        .map(|name| inst.lookup(name))
        .collect::<Result<_>>()?;
    for &t in &term_ids {
        if !inst.is_terminal(t) {
            return Err(Error::PlanMismatch(inst.name(t).to_string()));
        }
    }
    if term_ids.len() != inst.terminals().len() {
        return Err(Error::PlanMismatch(format!(
            "plan has {} terminals, instance has {}",
            term_ids.len(),
            inst.terminals().len()
        )));
    }

    let seven = Rat::int(7) - Rat::int(5) * gamma; // 7 - 5γ
    let pair_factor = &seven / Rat::int(12);
    let early_factor = &seven / (Rat::int(18) - Rat::int(14) * gamma);
    let cheap_factor = (Rat::ONE - gamma) * Rat::int(12) / &seven;

    let dist = |i: usize, j: usize| -> Rat {
        inst.dist_row(term_ids[i])[term_ids[j] as usize]
            .clone()
            .expect("terminals connected")
    };

    let mut strict = true;
    let mut pair_witness = None;
    'pairs: for i in 0..n {
        for j in (i + 1)..n {
            let bound = &pair_factor * dist(i, j);
            let m = plan.merge_time(i, j);
            if *m > bound {
                pair_witness = Some((plan.terminals()[i].clone(), plan.terminals()[j].clone()));
                break 'pairs;
            }
            if *m == bound {
                strict = false;
            }
        }
    }
    if pair_witness.is_some() {
        return Ok(GammaReport {
            verdict: GammaVerdict::Bad,
            exhaustive: false,
            subset_cap,
            pair_witness,
            cheap_set_witness: None,
            cheap_sets_seen: 0,
        });
    }

    let exhaustive = n <= subset_cap;
    let max_size = if exhaustive { n } else { subset_cap };
    let mut cheap_sets_seen = 0usize;
    let mut cheap_set_witness = None;
    'sizes: for size in 2..=max_size {
        let mut found: Option<Vec<String>> = None;
        for_each_subset_of_size(n, size, &mut |subset| {
            if found.is_some() {
                return;
            }
            let mask: TermMask = subset.iter().fold(0, |m, &i| m | (1 << i));
            let local = plan.local_value(mask);
            let xs: Vec<VertexId> = subset.iter().map(|&i| term_ids[i]).collect();
            let (cost, _) = inst.steiner_cost(&xs, size).expect("within cap");
            let bound = &cheap_factor * &local;
            // strictly γ-expensive sets need no early pair; everything else does
            let on_boundary = cost == bound;
            let cheap = cost < bound;
            if !cheap && !on_boundary {
                return;
            }
            if cheap {
                cheap_sets_seen += 1;
            }
            let mut has_early = false;
            let mut has_strict_early = false;
            for (a, &i) in subset.iter().enumerate() {
                for &j in &subset[a + 1..] {
                    let bound = &early_factor * dist(i, j);
                    let m = plan.merge_time(i, j);
                    if *m < bound {
                        has_early = true;
                        has_strict_early = true;
                        break;
                    }
                    if *m == bound {
                        has_early = true;
                    }
                }
                if has_strict_early {
                    break;
                }
            }
            if cheap && !has_early {
                found = Some(
                    subset
                        .iter()
                        .map(|&i| plan.terminals()[i].clone())
                        .collect(),
                );
                return;
            }
            if !has_strict_early {
                strict = false;
            }
        });
        if let Some(w) = found {
            cheap_set_witness = Some(w);
            break 'sizes;
        }
    }

    let verdict = if cheap_set_witness.is_some() {
        GammaVerdict::Bad
    } else if strict {
        GammaVerdict::StrictlyGood
    } else {
        GammaVerdict::Good
    };
    Ok(GammaReport {
        verdict,
        exhaustive,
        subset_cap,
        pair_witness: None,
        cheap_set_witness,
        cheap_sets_seen,
    })
}

/// The plan's merge matrix in the terminal order of `inst`.
pub fn times_in_instance_order(plan: &MergePlan, inst: &Instance) -> Result<Vec<Rat>> {
    let terms = inst.terminals();
    let n = terms.len();
    if n != plan.len() {
        return Err(Error::PlanMismatch(format!(
            "plan has {} terminals, instance has {}",
            plan.len(),
            n
        )));
    }
    let mut map = Vec::with_capacity(n);
    for &t in terms {
        map.push(plan.index_of(inst.name(t)).map_err(|_| {
            Error::PlanMismatch(format!("terminal {} missing from plan", inst.name(t)))
        })?);
    }
    let mut out = vec![Rat::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = plan.merge_time(map[i], map[j]).clone();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use rand::{Rng, SeedableRng};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    fn random_instance(rng: &mut impl Rng, nv: usize, nt: usize) -> Instance {
        let mut b = Instance::builder();
        let vn: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
        for t in vn.iter().take(nt) {
            b.terminal(t);
        }
        for i in 1..nv {
            let j = rng.gen_range(0..i);
            b.edge(
                &vn[i],
                &vn[j],
                rat!(rng.gen_range(1i64..10), rng.gen_range(1i64..4)),
            );
        }
        for _ in 0..nv / 2 {
            let i = rng.gen_range(0..nv);
            let j = rng.gen_range(0..nv);
            if i != j {
                b.edge(
                    &vn[i],
                    &vn[j],
                    rat!(rng.gen_range(1i64..10), rng.gen_range(1i64..4)),
                );
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn rejects_non_ultrametric() {
        let ts = names(3);
        // merge(0,2) = 5 > max(merge(0,1), merge(1,2)) = 2
        let mut m = vec![Rat::ZERO; 9];
        m[1] = rat!(1);
        m[3] = rat!(1);
        m[5] = rat!(2);
        m[7] = rat!(2);
        m[2] = rat!(5);
        m[6] = rat!(5);
        assert!(matches!(
            MergePlan::new(ts, m),
            Err(Error::NotUltrametric(..))
        ));
    }

    #[test]
    fn single_terminal_value_zero() {
        let plan = MergePlan::trivial(names(1));
        assert_eq!(plan.value(), Rat::ZERO);
    }

    #[test]
    fn value_of_two_level_plan() {
        // {a,b} merge at 1, then with {c} at 3: value = 2*1 + 1*2 = 4
        let ts = names(3);
        let mut m = vec![Rat::ZERO; 9];
        let set = |m: &mut Vec<Rat>, i: usize, j: usize, v: Rat| {
            m[i * 3 + j] = v.clone();
            m[j * 3 + i] = v;
        };
        set(&mut m, 0, 1, rat!(1));
        set(&mut m, 0, 2, rat!(3));
        set(&mut m, 1, 2, rat!(3));
        let plan = MergePlan::new(ts, m).unwrap();
        assert_eq!(plan.value(), rat!(4));
        assert_eq!(plan.local_value(0b111), rat!(4));
        assert_eq!(plan.local_value(0b011), rat!(1));
        assert_eq!(plan.local_value(0b101), rat!(3));
        assert_eq!(plan.partition_at(&rat!(1)).len(), 3);
        assert_eq!(plan.partition_at(&rat!(2)).len(), 2);
        assert_eq!(plan.partition_at(&rat!(7, 2)).len(), 1);
    }

    #[test]
    fn canonical_value_is_half_tmst() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(21);
        for _ in 0..8 {
            let inst = random_instance(&mut rng, 8, 4);
            let plan = MergePlan::canonical(&inst);
            assert_eq!(plan.value(), inst.tmst_cost() * rat!(1, 2));
        }
    }

    #[test]
    fn scaled_canonical_value() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(22);
        let inst = random_instance(&mut rng, 7, 4);
        let plan = MergePlan::canonical(&inst).scale(&rat!(7, 6));
        assert_eq!(plan.value(), inst.tmst_cost() * rat!(7, 12));
        let id = MergePlan::canonical(&inst).scale(&Rat::ONE);
        assert_eq!(id.value(), inst.tmst_cost() * rat!(1, 2));
    }

    #[test]
    fn value_from_upper_bound_is_mst() {
        // value(M_u) = MST_u, and MSTs under u and under merge times agree
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(23);
        for _ in 0..10 {
            let n = rng.gen_range(2..7);
            let ts = names(n);
            let mut vals = vec![Rat::ZERO; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rat!(rng.gen_range(0i64..8), rng.gen_range(1i64..4));
                    vals[i * n + j] = v.clone();
                    vals[j * n + i] = v;
                }
            }
            let u = UpperBound::new(ts, vals).unwrap();
            let plan = MergePlan::from_upper_bound(&u);
            assert_eq!(plan.value(), mst_cost(&u));
            // MST under the merge-time matrix has the same cost
            let tilde = UpperBound::new(plan.terminals().to_vec(), plan.times.clone()).unwrap();
            assert_eq!(mst_cost(&tilde), plan.value());
            // min-max identity by brute force over all simple paths
            for i in 0..n {
                for j in (i + 1)..n {
                    assert_eq!(*plan.merge_time(i, j), minimax(&u, i, j));
                }
            }
        }
    }

    fn mst_cost(u: &UpperBound) -> Rat {
        let n = u.terminals.len();
        let mut in_tree = vec![false; n];
        in_tree[0] = true;
        let mut total = Rat::ZERO;
        for _ in 1..n {
            let mut pick: Option<(usize, Rat)> = None;
            for j in 0..n {
                if in_tree[j] {
                    continue;
                }
                for i in 0..n {
                    if !in_tree[i] {
                        continue;
                    }
                    let d = u.get(i, j).clone();
                    match &pick {
                        None => pick = Some((j, d)),
                        Some((_, pd)) if d < *pd => pick = Some((j, d)),
                        _ => {}
                    }
                }
            }
            let (j, d) = pick.unwrap();
            in_tree[j] = true;
            total += d;
        }
        total
    }

    /// min over all simple i-j paths of the max edge, by DFS enumeration
    fn minimax(u: &UpperBound, i: usize, j: usize) -> Rat {
        let n = u.terminals.len();
        fn rec(
            u: &UpperBound,
            cur: usize,
            target: usize,
            visited: &mut Vec<bool>,
            curmax: Rat,
            best: &mut Option<Rat>,
        ) {
            if cur == target {
                match best {
                    None => *best = Some(curmax),
                    Some(b) if curmax < *b => *best = Some(curmax),
                    _ => {}
                }
                return;
            }
            for next in 0..visited.len() {
                if !visited[next] {
                    visited[next] = true;
                    let m = curmax.clone().max(u.get(cur, next).clone());
                    rec(u, next, target, visited, m, best);
                    visited[next] = false;
                }
            }
        }
        let mut visited = vec![false; n];
        visited[i] = true;
        let mut best = None;
        rec(u, i, j, &mut visited, Rat::ZERO, &mut best);
        best.unwrap()
    }

    #[test]
    fn zero_upper_bound_gives_trivial_plan() {
        let u = UpperBound::new(names(4), vec![Rat::ZERO; 16]).unwrap();
        let plan = MergePlan::from_upper_bound(&u);
        assert_eq!(plan.value(), Rat::ZERO);
        assert_eq!(plan.max_merge_time(), Rat::ZERO);
    }

    #[test]
    fn drop_is_twice_local_value_of_canonical() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(31);
        for _ in 0..6 {
            let inst = random_instance(&mut rng, 9, 5);
            let plan = MergePlan::canonical(&inst);
            let n = inst.terminals().len();
            // plan terminal order may differ from instance order
            let idx: Vec<usize> = inst
                .terminals()
                .iter()
                .map(|&t| plan.index_of(inst.name(t)).unwrap())
                .collect();
            for mask in 1u32..(1 << n) {
                let xs: Vec<_> = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| inst.terminals()[i])
                    .collect();
                let pmask: TermMask = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .fold(0, |m, i| m | (1 << idx[i]));
                assert_eq!(inst.drop_of(&xs).unwrap(), rat!(2) * plan.local_value(pmask));
            }
        }
    }

    #[test]
    fn local_value_superadditive_across_active_set() {
        // X inside an active part, X̄ outside:
        // local(X ∪ X̄) >= local(X) + local(X̄) + t*
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(37);
        for _ in 0..20 {
            let plan = MergePlan::random_ultrametric(names(6), &mut rng, &rat!(3));
            let tl = plan.timeline();
            for (pi, parts) in tl.partitions.iter().enumerate() {
                if pi == 0 || parts.len() < 2 {
                    continue;
                }
                let t_star = &tl.times[pi - 1]; // partition holds just after this time
                let s = parts[0];
                let xsub: TermMask = s & s.wrapping_neg(); // lowest bit of s
                let xbar: TermMask = parts[1..].iter().fold(0, |m, &p| m | p);
                if xbar == 0 {
                    continue;
                }
                let lhs = plan.local_value(xsub | xbar);
                let rhs = plan.local_value(xsub) + plan.local_value(xbar) + t_star;
                assert!(lhs >= rhs, "superadditivity failed");
            }
        }
    }

    #[test]
    fn value_matches_explicit_partition_sweep() {
        // independent oracle: sample the partition between consecutive
        // breakpoints and integrate |parts|-1 directly
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(41);
        for _ in 0..15 {
            let n = rng.gen_range(2..8);
            let plan = MergePlan::random_ultrametric(names(n), &mut rng, &rat!(4));
            let mut bps: Vec<Rat> = plan.times.to_vec();
            bps.push(Rat::ZERO);
            bps.sort();
            bps.dedup();
            let mut total = Rat::ZERO;
            for w in bps.windows(2) {
                let mid = (&w[0] + &w[1]) * rat!(1, 2);
                let parts = plan.partition_at(&mid).len();
                total += (&w[1] - &w[0]) * Rat::from((parts - 1) as u32);
            }
            assert_eq!(plan.value(), total);
        }
    }

    #[test]
    fn contract_full_set_gives_single_terminal() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(43);
        let plan = MergePlan::random_ultrametric(names(5), &mut rng, &rat!(2));
        let contracted = plan.contract_plan((1 << 5) - 1).unwrap();
        assert_eq!(contracted.len(), 1);
        assert_eq!(contracted.value(), Rat::ZERO);
    }

    #[test]
    fn contraction_commutes_with_upper_bound() {
        // M_u / X == M_{u_X}
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(47);
        for _ in 0..12 {
            let n = rng.gen_range(3..7usize);
            let ts = names(n);
            let mut vals = vec![Rat::ZERO; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rat!(rng.gen_range(0i64..6), rng.gen_range(1i64..4));
                    vals[i * n + j] = v.clone();
                    vals[j * n + i] = v;
                }
            }
            let u = UpperBound::new(ts.clone(), vals.clone()).unwrap();
            let plan = MergePlan::from_upper_bound(&u);
            let mask: TermMask = {
                let mut m = 0u128;
                while m.count_ones() < 2 {
                    m |= 1 << rng.gen_range(0..n);
                }
                m
            };
            let contracted = plan.contract_plan(mask).unwrap();
            // build u_X with the min-name representative
            let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let rep = members.iter().map(|&i| ts[i].clone()).min().unwrap();
            let keep: Vec<usize> = (0..n)
                .filter(|&i| mask & (1 << i) == 0 || ts[i] == rep)
                .collect();
            let k = keep.len();
            let mut cvals = vec![Rat::ZERO; k * k];
            for a in 0..k {
                for b in 0..k {
                    if a == b {
                        continue;
                    }
                    let (ia, ib) = (keep[a], keep[b]);
                    let v = if mask & (1 << ia) != 0 {
                        members.iter().map(|&m| u.get(m, ib).clone()).min().unwrap()
                    } else if mask & (1 << ib) != 0 {
                        members.iter().map(|&m| u.get(ia, m).clone()).min().unwrap()
                    } else {
                        u.get(ia, ib).clone()
                    };
                    cvals[a * k + b] = v;
                }
            }
            let cnames: Vec<String> = keep.iter().map(|&i| ts[i].clone()).collect();
            let ux = UpperBound::new(cnames, cvals).unwrap();
            let direct = MergePlan::from_upper_bound(&ux);
            assert_eq!(contracted.terminals(), direct.terminals());
            for a in 0..k {
                for b in 0..k {
                    assert_eq!(
                        contracted.merge_time(a, b),
                        direct.merge_time(a, b),
                        "contraction mismatch at ({a},{b})"
                    );
                }
            }
            // value(M) - value(M/X) = local_value(M, X)
            assert_eq!(&plan.value() - &contracted.value(), plan.local_value(mask));
        }
    }

    #[test]
    fn classify_canonical_on_mst_optimal() {
        // spanning instances are MST-optimal; canonical × 7/6 must be 0-good
        let mut b = Instance::builder();
        for t in ["a", "b", "c", "d"] {
            b.terminal(t);
        }
        b.edge("a", "b", rat!(2))
            .edge("b", "c", rat!(3))
            .edge("c", "d", rat!(2))
            .edge("a", "d", rat!(4));
        let inst = b.build().unwrap();
        let plan = MergePlan::canonical(&inst).scale(&rat!(7, 6));
        let report = classify_gamma(&plan, &inst, &Rat::ZERO, 16).unwrap();
        assert_eq!(report.verdict, GammaVerdict::Good);
        assert!(report.exhaustive);
        // after scaling by (1-ε) the plan is strictly 0-good
        let shrunk = plan.scale(&rat!(99, 100));
        let report = classify_gamma(&shrunk, &inst, &Rat::ZERO, 16).unwrap();
        assert_eq!(report.verdict, GammaVerdict::StrictlyGood);
    }

    #[test]
    fn classify_trivial_plan_good() {
        let mut b = Instance::builder();
        for t in ["a", "b"] {
            b.terminal(t);
        }
        b.edge("a", "b", rat!(1));
        let inst = b.build().unwrap();
        let plan = MergePlan::trivial(vec!["a".into(), "b".into()]);
        let report = classify_gamma(&plan, &inst, &Rat::ZERO, 16).unwrap();
        assert_eq!(report.verdict, GammaVerdict::StrictlyGood);
    }

    #[test]
    fn classify_oversized_plan_bad() {
        let mut b = Instance::builder();
        for t in ["a", "b"] {
            b.terminal(t);
        }
        b.edge("a", "b", rat!(1));
        let inst = b.build().unwrap();
        let plan = MergePlan::canonical(&inst).scale(&rat!(3));
        let report = classify_gamma(&plan, &inst, &Rat::ZERO, 16).unwrap();
        assert_eq!(report.verdict, GammaVerdict::Bad);
        assert!(report.pair_witness.is_some());
    }

    #[test]
    fn random_ultrametric_is_valid_and_varied() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(53);
        for _ in 0..20 {
            let plan = MergePlan::random_ultrametric(names(7), &mut rng, &rat!(3, 2));
            MergePlan::new(plan.terminals().to_vec(), plan.times.to_vec()).unwrap();
            assert!(plan.max_merge_time() <= rat!(3, 2));
            assert!(plan.max_merge_time().is_positive());
        }
    }
}
