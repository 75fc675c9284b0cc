//! Steiner tree instances: weighted graphs with a distinguished terminal set.
//!
//! An [`Instance`] is immutable after construction and safe to share across
//! threads; per-source shortest-path rows and the terminal MST are computed
//! lazily and cached.

use crate::heap::RatHeap;
use crate::rat::Rat;
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

pub type VertexId = u32;
pub type EdgeId = u32;

#[derive(Debug, Clone)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub cost: Rat,
}

impl Edge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }
}

/// An edge subset connecting a terminal set, with its cost.
#[derive(Debug, Clone)]
pub struct Component {
    pub edges: Vec<EdgeId>,
    pub connected_terminals: Vec<VertexId>,
    pub cost: Rat,
}

/// Result of a bounded MST-optimality check.
#[derive(Debug, Clone)]
pub struct MstOptimality {
    /// No improving component with at most `cap` terminals exists.
    pub optimal_up_to_cap: bool,
    /// Whether the cap covered every terminal subset (`cap >= |R|`).
    pub conclusive: bool,
    pub cap: usize,
    /// Improving witness: the terminal set, its cheapest full component and its drop.
    pub witness: Option<(Vec<VertexId>, Component, Rat)>,
}

pub struct Instance {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    terminals: Vec<VertexId>,
    terminal_index: Vec<Option<u32>>,
    root: Option<VertexId>,
    edges: Vec<Edge>,
    adj_off: Vec<u32>,
    adj: Vec<(VertexId, EdgeId)>,
    dist_cache: Vec<OnceLock<Arc<Vec<Option<Rat>>>>>,
    tmst_cache: OnceLock<(Rat, Vec<(VertexId, VertexId)>)>,
}

/// Builder used by parsers and gadget generators.
#[derive(Default)]
pub struct InstanceBuilder {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    terminals: Vec<String>,
    root: Option<String>,
    edges: Vec<(VertexId, VertexId, Rat)>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, name: &str) -> VertexId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as VertexId;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn edge(&mut self, u: &str, v: &str, cost: Rat) -> &mut Self {
        let ui = self.vertex(u);
        let vi = self.vertex(v);
        self.edges.push((ui, vi, cost));
        self
    }

    pub fn terminal(&mut self, name: &str) -> &mut Self {
        self.vertex(name);
        self.terminals.push(name.to_string());
        self
    }

    pub fn root(&mut self, name: &str) -> &mut Self {
        self.root = Some(name.to_string());
        self
    }

    pub fn build(self) -> Result<Instance> {
        if self.terminals.is_empty() {
            return Err(Error::NoTerminals);
        }
        let n = self.names.len();
        // collapse parallel edges keeping the cheaper one; drop loops
        let mut best: HashMap<(VertexId, VertexId), Rat> = HashMap::new();
        for (u, v, cost) in self.edges {
            if !cost.is_positive() {
                return Err(Error::NonPositiveCost {
                    u: self.names[u as usize].clone(),
                    v: self.names[v as usize].clone(),
                    cost,
                });
            }
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            match best.entry(key) {
                std::collections::hash_map::Entry::Occupied(mut slot) => {
                    if cost < *slot.get() {
                        slot.insert(cost);
                    }
                }
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(cost);
                }
            }
        }
        let mut edge_list: Vec<_> = best.into_iter().collect();
        edge_list.sort_by_key(|((u, v), _)| (*u, *v));
        let edges: Vec<Edge> = edge_list
            .into_iter()
            .map(|((u, v), cost)| Edge { u, v, cost })
            .collect();

        let mut deg = vec![0u32; n];
        for e in &edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        let mut adj_off = vec![0u32; n + 1];
        for i in 0..n {
            adj_off[i + 1] = adj_off[i] + deg[i];
        }
        let mut adj = vec![(0u32, 0u32); edges.len() * 2];
        let mut fill = adj_off.clone();
        for (i, e) in edges.iter().enumerate() {
            adj[fill[e.u as usize] as usize] = (e.v, i as EdgeId);
            fill[e.u as usize] += 1;
            adj[fill[e.v as usize] as usize] = (e.u, i as EdgeId);
            fill[e.v as usize] += 1;
        }

        let mut terminals: Vec<VertexId> = Vec::new();
        for t in &self.terminals {
            let id = *self.index.get(t).expect("terminal was interned");
            if !terminals.contains(&id) {
                terminals.push(id);
            }
        }
        terminals.sort_unstable();
        let mut terminal_index = vec![None; n];
        for (i, &t) in terminals.iter().enumerate() {
            terminal_index[t as usize] = Some(i as u32);
        }
        let root = match &self.root {
            Some(r) => {
                let id = *self
                    .index
                    .get(r)
                    .ok_or_else(|| Error::UnknownVertex(r.clone()))?;
                if terminal_index[id as usize].is_none() {
                    return Err(Error::NotATerminal(r.clone()));
                }
                Some(id)
            }
            None => None,
        };

        let inst = Instance {
            dist_cache: (0..n).map(|_| OnceLock::new()).collect(),
            tmst_cache: OnceLock::new(),
            names: self.names,
            index: self.index,
            terminals,
            terminal_index,
            root,
            edges,
            adj_off,
            adj,
        };

        // terminals must lie in one connected component
        let reach = inst.bfs_component(inst.terminals[0]);
        for &t in &inst.terminals {
            if !reach[t as usize] {
                return Err(Error::TerminalsDisconnected(
                    inst.names[t as usize].clone(),
                    inst.names[inst.terminals[0] as usize].clone(),
                ));
            }
        }
        Ok(inst)
    }
}

impl Instance {
    pub fn builder() -> InstanceBuilder {
        InstanceBuilder::new()
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e as usize]
    }

    pub fn terminals(&self) -> &[VertexId] {
        &self.terminals
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.terminal_index[v as usize].is_some()
    }

    /// Index of `v` within `terminals()`, if it is a terminal.
    pub fn terminal_index(&self, v: VertexId) -> Option<usize> {
        self.terminal_index[v as usize].map(|i| i as usize)
    }

    pub fn root(&self) -> Option<VertexId> {
        self.root
    }

    /// The root if set, otherwise the terminal with the smallest id.
    pub fn effective_root(&self) -> VertexId {
        self.root.unwrap_or(self.terminals[0])
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v as usize]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Result<VertexId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[self.adj_off[v as usize] as usize..self.adj_off[v as usize + 1] as usize]
    }

    fn bfs_component(&self, start: VertexId) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = vec![start];
        seen[start as usize] = true;
        while let Some(v) = queue.pop() {
            for &(w, _) in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push(w);
                }
            }
        }
        seen
    }

    /// Shortest-path distances from `src` to every vertex (`None` when
    /// unreachable). Rows are cached; ties are broken by vertex id.
    pub fn dist_row(&self, src: VertexId) -> Arc<Vec<Option<Rat>>> {
        self.dist_cache[src as usize]
            .get_or_init(|| {
                let (dist, _) = self.dijkstra(src, |_| true);
                Arc::new(dist)
            })
            .clone()
    }

    /// Dijkstra from `src` over vertices accepted by `allowed` (the source is
    /// always expanded). Returns distances and parent edges.
    pub fn dijkstra<F: Fn(VertexId) -> bool>(
        &self,
        src: VertexId,
        allowed: F,
    ) -> (Vec<Option<Rat>>, Vec<Option<EdgeId>>) {
        let n = self.vertex_count();
        let mut dist: Vec<Option<Rat>> = vec![None; n];
        let mut parent: Vec<Option<EdgeId>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = RatHeap::new(n);
        dist[src as usize] = Some(Rat::ZERO);
        heap.set(src, Rat::ZERO);
        while let Some((v, d)) = heap.pop() {
            if done[v as usize] {
                continue;
            }
            done[v as usize] = true;
            if v != src && !allowed(v) {
                continue; // reachable but not expandable
            }
            for &(w, e) in self.neighbors(v) {
                if done[w as usize] {
                    continue;
                }
                let nd = &d + &self.edges[e as usize].cost;
                let better = match &dist[w as usize] {
                    None => true,
                    Some(cur) => nd < *cur,
                };
                if better {
                    dist[w as usize] = Some(nd.clone());
                    parent[w as usize] = Some(e);
                    heap.set(w, nd);
                }
            }
        }
        (dist, parent)
    }

    /// Exact shortest-path length between two vertices.
    pub fn shortest_distance(&self, u: VertexId, v: VertexId) -> Result<Rat> {
        self.dist_row(u)[v as usize]
            .clone()
            .ok_or_else(|| Error::Disconnected(self.name(u).into(), self.name(v).into()))
    }

    /// Shortest path as an edge list (deterministic tie-breaking).
    pub fn shortest_path(&self, u: VertexId, v: VertexId) -> Result<(Rat, Vec<EdgeId>)> {
        let (dist, parent) = self.dijkstra(u, |_| true);
        let d = dist[v as usize]
            .clone()
            .ok_or_else(|| Error::Disconnected(self.name(u).into(), self.name(v).into()))?;
        let mut edges = Vec::new();
        let mut cur = v;
        while cur != u {
            let e = parent[cur as usize].expect("parent chain broken");
            edges.push(e);
            cur = self.edges[e as usize].other(cur);
        }
        edges.reverse();
        Ok((d, edges))
    }

    /// Cost of a terminal MST in the metric closure, with a witness tree on
    /// terminal pairs.
    pub fn tmst(&self) -> (Rat, Vec<(VertexId, VertexId)>) {
        self.tmst_cache
            .get_or_init(|| {
                let rows: Vec<_> = self.terminals.iter().map(|&t| self.dist_row(t)).collect();
                let k = self.terminals.len();
                if k == 1 {
                    return (Rat::ZERO, Vec::new());
                }
                // Prim over the terminal metric; ties by terminal index.
                let mut in_tree = vec![false; k];
                let mut best: Vec<Option<(Rat, usize)>> = vec![None; k];
                in_tree[0] = true;
                for j in 1..k {
                    best[j] = Some((
                        rows[0][self.terminals[j] as usize]
                            .clone()
                            .expect("terminals connected"),
                        0,
                    ));
                }
                let mut total = Rat::ZERO;
                let mut tree = Vec::new();
                for _ in 1..k {
                    let mut pick = None;
                    for j in 0..k {
                        if in_tree[j] {
                            continue;
                        }
                        let (d, _) = best[j].as_ref().unwrap();
                        match &pick {
                            None => pick = Some((j, d.clone())),
                            Some((_, pd)) if d < pd => pick = Some((j, d.clone())),
                            _ => {}
                        }
                    }
                    let (j, d) = pick.expect("tree incomplete");
                    let (_, from) = best[j].clone().unwrap();
                    in_tree[j] = true;
                    total += d;
                    tree.push((self.terminals[from], self.terminals[j]));
                    for l in 0..k {
                        if in_tree[l] {
                            continue;
                        }
                        let nd = rows[j][self.terminals[l] as usize]
                            .clone()
                            .expect("terminals connected");
                        let cur = best[l].as_ref().unwrap();
                        if nd < cur.0 {
                            best[l] = Some((nd, j));
                        }
                    }
                }
                (total, tree)
            })
            .clone()
    }

    pub fn tmst_cost(&self) -> Rat {
        self.tmst().0
    }

    fn check_terminal_subset(&self, xs: &[VertexId]) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::EmptySubset);
        }
        for &x in xs {
            if !self.is_terminal(x) {
                return Err(Error::NotATerminal(self.name(x).into()));
            }
        }
        Ok(())
    }

    /// Contracts the terminal subset `xs` into a single terminal (named after
    /// the lexicographically smallest member). Parallel edges keep the
    /// cheaper cost; loops vanish.
    pub fn contract(&self, xs: &[VertexId]) -> Result<Instance> {
        self.check_terminal_subset(xs)?;
        let mut in_x = vec![false; self.vertex_count()];
        for &x in xs {
            in_x[x as usize] = true;
        }
        let rep = xs
            .iter()
            .copied()
            .min_by(|a, b| self.name(*a).cmp(self.name(*b)))
            .unwrap();
        let mut b = InstanceBuilder::new();
        let map_name = |v: VertexId| -> &str {
            if in_x[v as usize] {
                self.name(rep)
            } else {
                self.name(v)
            }
        };
        for &t in &self.terminals {
            if !in_x[t as usize] || t == rep {
                b.terminal(map_name(t));
            }
        }
        if let Some(r) = self.root {
            b.root(map_name(r));
        }
        for v in 0..self.vertex_count() as VertexId {
            b.vertex(map_name(v));
        }
        for e in &self.edges {
            b.edge(map_name(e.u), map_name(e.v), e.cost.clone());
        }
        b.build()
    }

    /// drop(X) = TMST(G) - TMST(G/X), computed on the terminal metric
    /// (shortest paths through the contracted blob shortcut via X).
    pub fn drop_of(&self, xs: &[VertexId]) -> Result<Rat> {
        self.check_terminal_subset(xs)?;
        let (tmst, _) = self.tmst();
        Ok(&tmst - &self.contracted_tmst(xs))
    }

    /// TMST of G/X without materializing the contraction:
    /// d'(a,b) = min(d(a,b), d(a,X) + d(X,b)).
    fn contracted_tmst(&self, xs: &[VertexId]) -> Rat {
        let k = self.terminals.len();
        let mut in_x = vec![false; k];
        for &x in xs {
            in_x[self.terminal_index(x).unwrap()] = true;
        }
        let rows: Vec<_> = self.terminals.iter().map(|&t| self.dist_row(t)).collect();
        let d = |a: usize, b: usize| -> Rat {
            rows[a][self.terminals[b] as usize]
                .clone()
                .expect("terminals connected")
        };
        let dx: Vec<Rat> = (0..k)
            .map(|a| {
                (0..k)
                    .filter(|&b| in_x[b])
                    .map(|b| d(a, b))
                    .min()
                    .expect("xs nonempty")
            })
            .collect();
        // nodes: contracted blob + terminals outside X
        let outside: Vec<usize> = (0..k).filter(|&a| !in_x[a]).collect();
        let m = outside.len();
        if m == 0 {
            return Rat::ZERO;
        }
        let mut in_tree = vec![false; m];
        // start from the blob
        let mut best: Vec<Rat> = outside.iter().map(|&a| dx[a].clone()).collect();
        let mut total = Rat::ZERO;
        for _ in 0..m {
            let mut pick: Option<(usize, Rat)> = None;
            for j in 0..m {
                if in_tree[j] {
                    continue;
                }
                match &pick {
                    None => pick = Some((j, best[j].clone())),
                    Some((_, pd)) if best[j] < *pd => pick = Some((j, best[j].clone())),
                    _ => {}
                }
            }
            let (j, dj) = pick.unwrap();
            in_tree[j] = true;
            total += dj;
            for l in 0..m {
                if in_tree[l] {
                    continue;
                }
                let via = {
                    let direct = d(outside[j], outside[l]);
                    let blob = &dx[outside[j]] + &dx[outside[l]];
                    direct.min(blob)
                };
                if via < best[l] {
                    best[l] = via;
                }
            }
        }
        total
    }

    /// Exact minimum Steiner-tree cost connecting the vertices `xs`
    /// (pseudo-terminals allowed), via the Dreyfus–Wagner dynamic program,
    /// with a witness component. `size_cap` bounds `|xs|`.
    pub fn steiner_cost(&self, xs: &[VertexId], size_cap: usize) -> Result<(Rat, Component)> {
        self.dreyfus_wagner(xs, size_cap, |_| true)
            .map(|o| o.expect("whole graph connected to terminals"))
    }

    /// Minimum cost of a component connecting the terminal subset `xs` that
    /// avoids all other terminals (the candidates for full components).
    /// `None` when no such component exists.
    pub fn full_component_cost(
        &self,
        xs: &[VertexId],
        size_cap: usize,
    ) -> Result<Option<(Rat, Component)>> {
        self.check_terminal_subset(xs)?;
        let allowed = |v: VertexId| !self.is_terminal(v) || xs.contains(&v);
        self.dreyfus_wagner(xs, size_cap, allowed)
    }

    fn dreyfus_wagner<F: Fn(VertexId) -> bool + Copy>(
        &self,
        xs: &[VertexId],
        size_cap: usize,
        allowed: F,
    ) -> Result<Option<(Rat, Component)>> {
        if xs.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut xs_dedup = xs.to_vec();
        xs_dedup.sort_unstable();
        xs_dedup.dedup();
        let xs = xs_dedup;
        if xs.len() > size_cap {
            return Err(Error::TooLarge {
                what: "Dreyfus-Wagner terminal set",
                size: xs.len(),
                cap: size_cap,
            });
        }
        let component = |edges: Vec<EdgeId>, cost: Rat| Component {
            connected_terminals: xs.clone(),
            edges,
            cost,
        };
        if xs.len() == 1 {
            return Ok(Some((Rat::ZERO, component(Vec::new(), Rat::ZERO))));
        }

        let n = self.vertex_count();
        let k = xs.len();
        let q = xs[k - 1];
        let base = &xs[..k - 1];
        let full: u32 = (1u32 << (k - 1)) - 1;

        // dp[mask][v]: cheapest tree connecting {base[i] : i in mask} ∪ {v},
        // restricted to `allowed` vertices. choice records the witness.
        #[derive(Clone, PartialEq)]
        enum Choice {
            None,
            Base,
            Split(u32),
            Edge(EdgeId, VertexId),
        }
        let mut dp: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; (full + 1) as usize];
        let mut choice: Vec<Vec<Choice>> = vec![vec![Choice::None; n]; (full + 1) as usize];

        for mask in 1..=full {
            let mut heap = RatHeap::new(n);
            if mask.count_ones() == 1 {
                let i = mask.trailing_zeros() as usize;
                let v = base[i];
                dp[mask as usize][v as usize] = Some(Rat::ZERO);
                choice[mask as usize][v as usize] = Choice::Base;
                heap.set(v, Rat::ZERO);
            } else {
                // merge step: combine two sub-trees at v
                let mut sub = (mask - 1) & mask;
                while sub > 0 {
                    if sub < mask - sub {
                        break; // each split seen once
                    }
                    for v in 0..n {
                        if let (Some(a), Some(b)) =
                            (&dp[sub as usize][v], &dp[(mask - sub) as usize][v])
                        {
                            let c = a + b;
                            let better = match &dp[mask as usize][v] {
                                None => true,
                                Some(cur) => c < *cur,
                            };
                            if better {
                                dp[mask as usize][v] = Some(c.clone());
                                choice[mask as usize][v] = Choice::Split(sub);
                                heap.set(v as VertexId, c);
                            }
                        }
                    }
                    sub = (sub - 1) & mask;
                }
            }
            // relaxation step: grow trees along graph edges
            let mut done = vec![false; n];
            while let Some((v, d)) = heap.pop() {
                if done[v as usize] {
                    continue;
                }
                done[v as usize] = true;
                if !allowed(v) && !xs.contains(&v) {
                    continue;
                }
                for &(w, e) in self.neighbors(v) {
                    if done[w as usize] {
                        continue;
                    }
                    let nd = &d + &self.edges[e as usize].cost;
                    let better = match &dp[mask as usize][w as usize] {
                        None => true,
                        Some(cur) => nd < *cur,
                    };
                    if better {
                        dp[mask as usize][w as usize] = Some(nd.clone());
                        choice[mask as usize][w as usize] = Choice::Edge(e, v);
                        heap.set(w, nd);
                    }
                }
            }
        }

        let best = match &dp[full as usize][q as usize] {
            Some(c) => c.clone(),
            None => return Ok(None),
        };

        // witness reconstruction
        let mut edges: Vec<EdgeId> = Vec::new();
        let mut stack = vec![(full, q)];
        while let Some((mask, v)) = stack.pop() {
            match &choice[mask as usize][v as usize] {
                Choice::Base | Choice::None => {}
                Choice::Split(sub) => {
                    stack.push((*sub, v));
                    stack.push((mask - sub, v));
                }
                Choice::Edge(e, u) => {
                    edges.push(*e);
                    stack.push((mask, *u));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Some((best.clone(), component(edges, best))))
    }

    /// Bounded check for improving components: enumerates terminal subsets up
    /// to `cap` and compares the cheapest full-component cost against the
    /// drop. Conclusive only when `cap >= |R|`.
    pub fn is_mst_optimal(&self, cap: usize) -> Result<MstOptimality> {
        let k = self.terminals.len();
        let limit = cap.min(k);
        let conclusive = cap >= k;
        if k > 25 {
            return Err(Error::TooLarge {
                what: "terminal subsets to enumerate",
                size: k,
                cap: 25,
            });
        }
        for size in 2..=limit {
            let mut witness: Option<(Vec<VertexId>, Component, Rat)> = None;
            for_each_subset_of_size(k, size, &mut |subset| {
                if witness.is_some() {
                    return;
                }
                let xs: Vec<VertexId> = subset.iter().map(|&i| self.terminals[i]).collect();
                let drop = self.drop_of(&xs).expect("valid subset");
                if !drop.is_positive() {
                    return;
                }
                if let Some((cost, comp)) = self.full_component_cost(&xs, size).expect("cap ok") {
                    if cost < drop {
                        witness = Some((xs, comp, drop));
                    }
                }
            });
            if let Some(w) = witness {
                return Ok(MstOptimality {
                    optimal_up_to_cap: false,
                    conclusive: true, // a witness is conclusive evidence
                    cap,
                    witness: Some(w),
                });
            }
        }
        Ok(MstOptimality {
            optimal_up_to_cap: true,
            conclusive,
            cap,
            witness: None,
        })
    }

    /// Checks that the component's edges connect all of its terminals.
    pub fn component_is_connected(&self, comp: &Component) -> bool {
        if comp.connected_terminals.len() <= 1 {
            return true;
        }
        let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for &e in &comp.edges {
            let edge = self.edge(e);
            adj.entry(edge.u).or_default().push(edge.v);
            adj.entry(edge.v).or_default().push(edge.u);
        }
        let start = comp.connected_terminals[0];
        let mut seen = std::collections::HashSet::new();
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if let Some(ns) = adj.get(&v) {
                for &w in ns {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        comp.connected_terminals.iter().all(|t| seen.contains(t))
    }
}

/// Calls `f` with each `size`-subset of `0..n` (ascending lexicographic).
pub fn for_each_subset_of_size<F: FnMut(&[usize])>(n: usize, size: usize, f: &mut F) {
    fn rec<F: FnMut(&[usize])>(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, f: &mut F) {
        if cur.len() == size {
            f(cur);
            return;
        }
        let remaining = size - cur.len();
        for i in start..=n.saturating_sub(remaining) {
            cur.push(i);
            rec(n, size, i + 1, cur, f);
            cur.pop();
        }
    }
    if size == 0 || size > n {
        return;
    }
    let mut cur = Vec::with_capacity(size);
    rec(n, size, 0, &mut cur, f);
}
