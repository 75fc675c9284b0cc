//! Lower-bound gadget instances.
//!
//! The 3x-gadget forces a moat to cover distance at effective speed 3 once
//! two terminals interact; the jump-gadget chains subdivided copies of it so
//! that three terminals all reach a distinguished vertex at time
//! 7/6 + 1/(6k); the composed instance places one jump-gadget per ordered
//! terminal pair and auxiliary terminal, which caps every merge-plan dual at
//! (7/12 + ε) · TMST.

use crate::growth::{self, GrowthOptions};
use crate::instance::{Instance, InstanceBuilder};
use crate::mergeplan::MergePlan;
use crate::rat::Rat;
use crate::{Error, Result};

/// ceil(p/q) for positive rationals
fn ceil_to_int(r: &Rat) -> i64 {
    let f = r.to_f64().ceil() as i64;
    // exact correction around the floating approximation
    let mut c = f;
    while Rat::int(c) < *r {
        c += 1;
    }
    while c > 0 && Rat::int(c - 1) >= *r {
        c -= 1;
    }
    c
}

/// Appends a 3x-gadget between the existing terminals `s` (fast side, with
/// k spokes) and `s_star` to the builder. `w` is the distinguished endpoint
/// (created if missing); internal vertices get the given prefix.
fn append_three_x(b: &mut InstanceBuilder, prefix: &str, s: &str, s_star: &str, w: &str, k: i64) {
    let unit = Rat::new(1, 6 * k);
    let spoke = Rat::ONE - &unit;
    let xname = |j: i64| format!("{prefix}x{j}");
    for j in 0..=2 * k {
        b.edge(&xname(j), &xname(j + 1), unit.clone());
    }
    b.edge(s_star, &xname(0), spoke.clone());
    for j in 1..=k {
        b.edge(s, &xname(2 * j), spoke.clone());
    }
    b.edge(&xname(2 * k + 1), w, Rat::new(1, 6));
}

/// Appends a jump-gadget from `s_star` to `w` involving the pair terminals
/// `s` and `s_prime`.
fn append_jump(
    b: &mut InstanceBuilder,
    prefix: &str,
    s: &str,
    s_prime: &str,
    s_star: &str,
    w: &str,
    k: i64,
) {
    let unit = Rat::new(1, 6 * k);
    let spoke = Rat::new(7, 6) - &unit;
    let xname = |j: i64| format!("{prefix}x{j}");
    for j in 0..30 * k - 1 {
        b.edge(&xname(j), &xname(j + 1), unit.clone());
    }
    b.edge(&xname(30 * k - 1), &xname(30 * k), unit.clone());
    b.edge(&xname(30 * k), w, unit.clone());
    for j in 1..=15 * k {
        b.edge(s, &xname(2 * j - 1), spoke.clone());
    }
    append_three_x(b, &format!("{prefix}gs_"), s, s_star, &xname(0), k);
    for j in 1..=15 * k - 1 {
        append_three_x(
            b,
            &format!("{prefix}g{j}_"),
            s,
            s_prime,
            &xname(2 * j),
            k,
        );
    }
}

pub struct ThreeXGadget {
    pub instance: Instance,
    pub s: String,
    pub s_star: String,
    pub w: String,
    pub k: i64,
}

/// Standalone 3x-gadget with terminals `s`, `s*` and Steiner endpoint `w`.
pub fn three_x_gadget(k: i64) -> Result<ThreeXGadget> {
    if k < 1 {
        return Err(Error::Parse("3x-gadget needs k >= 1".into()));
    }
    let mut b = Instance::builder();
    b.terminal("s").terminal("s*");
    append_three_x(&mut b, "", "s", "s*", "w", k);
    Ok(ThreeXGadget {
        instance: b.build()?,
        s: "s".into(),
        s_star: "s*".into(),
        w: "w".into(),
        k,
    })
}

pub struct JumpGadget {
    pub instance: Instance,
    pub s: String,
    pub s_prime: String,
    pub s_star: String,
    pub w: String,
    pub k: i64,
}

/// Standalone jump-gadget with terminals `s`, `s'`, `s*` and endpoint `w`.
pub fn jump_gadget(k: i64) -> Result<JumpGadget> {
    if k < 1 {
        return Err(Error::Parse("jump-gadget needs k >= 1".into()));
    }
    let mut b = Instance::builder();
    b.terminal("s").terminal("s'").terminal("s*");
    append_jump(&mut b, "", "s", "s'", "s*", "w", k);
    Ok(JumpGadget {
        instance: b.build()?,
        s: "s".into(),
        s_prime: "s'".into(),
        s_star: "s*".into(),
        w: "w".into(),
        k,
    })
}

/// The composed lower-bound instance on the given terminals: for every
/// ordered pair (s, s') a central vertex and a jump-gadget from every other
/// terminal to it, sharing only the terminal set. k = ceil(1/(6ε)).
pub fn lower_bound_instance(terminals: &[String], epsilon: &Rat) -> Result<Instance> {
    if terminals.len() < 3 {
        return Err(Error::Parse(
            "composed lower-bound instance needs at least 3 terminals".into(),
        ));
    }
    if !epsilon.is_positive() {
        return Err(Error::Parse("epsilon must be positive".into()));
    }
    let k = ceil_to_int(&(Rat::ONE / (Rat::int(6) * epsilon))).max(1);
    let mut b = Instance::builder();
    for t in terminals {
        b.terminal(t);
    }
    let n = terminals.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let center = format!("c{i}_{j}");
            for (m, s_star) in terminals.iter().enumerate() {
                if m == i || m == j {
                    continue;
                }
                let prefix = format!("g{i}_{j}_{m}_");
                append_jump(
                    &mut b,
                    &prefix,
                    &terminals[i],
                    &terminals[j],
                    s_star,
                    &center,
                    k,
                );
            }
        }
    }
    b.build()
}

/// Suggested gadget scale for a target epsilon.
pub fn k_for_epsilon(epsilon: &Rat) -> i64 {
    ceil_to_int(&(Rat::ONE / (Rat::int(6) * epsilon))).max(1)
}

#[derive(Debug, Clone)]
pub struct GadgetCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct GadgetReport {
    pub checks: Vec<GadgetCheck>,
}

impl GadgetReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(checks: &mut Vec<GadgetCheck>, name: &str, pass: bool, detail: String) {
    checks.push(GadgetCheck {
        name: name.to_string(),
        pass,
        detail,
    });
}

fn check_eq(checks: &mut Vec<GadgetCheck>, name: &str, got: &Rat, want: &Rat) {
    check(
        checks,
        name,
        got == want,
        format!("got {got}, want {want}"),
    );
}

/// Verifies the stated distances, reach times and component-cost bounds of
/// the 3x-gadget under a late-merging plan (merge(s, s*) >= 7/6 + ε).
pub fn verify_three_x(k: i64) -> Result<GadgetReport> {
    let g = three_x_gadget(k)?;
    let inst = &g.instance;
    let unit = Rat::new(1, 6 * k);
    let mut checks = Vec::new();

    let s = inst.lookup(&g.s)?;
    let s_star = inst.lookup(&g.s_star)?;
    let w = inst.lookup(&g.w)?;
    check_eq(
        &mut checks,
        "dist(s, w) = 7/6",
        &inst.shortest_distance(s, w)?,
        &Rat::new(7, 6),
    );
    check_eq(
        &mut checks,
        "dist(s*, w) = 3/2",
        &inst.shortest_distance(s_star, w)?,
        &Rat::new(3, 2),
    );
    check_eq(
        &mut checks,
        "dist(s, s*) = 2",
        &inst.shortest_distance(s, s_star)?,
        &Rat::int(2),
    );

    // cheapest component connecting {s, s*, w}: 5/2 - 1/(6k)
    let (comp_cost, _) = inst.steiner_cost(&[s, s_star, w], 3)?;
    check_eq(
        &mut checks,
        "cost{s, s*, w} = 5/2 - 1/(6k)",
        &comp_cost,
        &(Rat::new(5, 2) - &unit),
    );

    // late merge: run with merge(s, s*) = 2 > 7/6 + 1/(6k)
    let plan = MergePlan::new(
        vec![g.s.clone(), g.s_star.clone()],
        vec![Rat::ZERO, Rat::int(2), Rat::int(2), Rat::ZERO],
    )?;
    let (trace, _) = growth::run(inst, &plan)?;
    let si = inst.terminal_index(s).unwrap();
    let qi = inst.terminal_index(s_star).unwrap();
    let atf_s_w = trace.atf_set(1 << si, w)?;
    check(
        &mut checks,
        "atf(s, w) = 7/6",
        atf_s_w == Some(Rat::new(7, 6)),
        format!("got {atf_s_w:?}"),
    );
    let atf_star_w = trace.atf_set(1 << qi, w)?;
    let covered = atf_star_w
        .as_ref()
        .map(|t| *t <= Rat::new(7, 6))
        .unwrap_or(false)
        || *plan.merge_time(0, 1) <= Rat::new(7, 6);
    check(
        &mut checks,
        "min(atf(s*, w), merge(s*, s)) <= 7/6",
        covered,
        format!("atf(s*, w) = {atf_star_w:?}"),
    );

    // MST-optimality of the gadget itself
    let mst = inst.is_mst_optimal(2)?;
    check(
        &mut checks,
        "gadget is MST-optimal",
        mst.optimal_up_to_cap && mst.conclusive,
        format!("cap {}", mst.cap),
    );
    Ok(GadgetReport { checks })
}

/// Verifies the stated properties of the jump-gadget under a late-merging
/// plan (all merge times 2 > 7/6 + 1/(6k)).
pub fn verify_jump(k: i64) -> Result<GadgetReport> {
    let g = jump_gadget(k)?;
    let inst = &g.instance;
    let unit = Rat::new(1, 6 * k);
    let mut checks = Vec::new();

    let s = inst.lookup(&g.s)?;
    let sp = inst.lookup(&g.s_prime)?;
    let sq = inst.lookup(&g.s_star)?;
    let w = inst.lookup(&g.w)?;
    check_eq(
        &mut checks,
        "dist(s, w) = 7/6 + 1/(6k)",
        &inst.shortest_distance(s, w)?,
        &(Rat::new(7, 6) + &unit),
    );
    check_eq(
        &mut checks,
        "dist(s', w) = 3/2 + 3/(6k)",
        &inst.shortest_distance(sp, w)?,
        &(Rat::new(3, 2) + Rat::int(3) * &unit),
    );
    check_eq(
        &mut checks,
        "dist(s*, w) = 2 + 7/6 + 1/(6k)",
        &inst.shortest_distance(sq, w)?,
        &(Rat::int(2) + Rat::new(7, 6) + &unit),
    );
    check_eq(
        &mut checks,
        "dist(s, s') = 2",
        &inst.shortest_distance(s, sp)?,
        &Rat::int(2),
    );
    check_eq(
        &mut checks,
        "dist(s, s*) = 2",
        &inst.shortest_distance(s, sq)?,
        &Rat::int(2),
    );
    check(
        &mut checks,
        "pairwise terminal distances >= 2",
        inst.shortest_distance(sp, sq)? >= Rat::int(2),
        format!("dist(s', s*) = {}", inst.shortest_distance(sp, sq)?),
    );

    // the only s*-w path avoiding other terminals costs at least 6
    let (d_filtered, _) = inst.dijkstra(sq, |v| !inst.is_terminal(v) || v == sq || v == w);
    let avoid = d_filtered[w as usize].clone();
    check(
        &mut checks,
        "s*-w path avoiding terminals costs >= 6",
        avoid.as_ref().map(|d| *d >= Rat::int(6)).unwrap_or(true),
        format!("got {avoid:?}"),
    );

    // any component connecting {s, s', s*} costs at least 4
    let (comp_cost, _) = inst.steiner_cost(&[s, sp, sq], 3)?;
    check(
        &mut checks,
        "cost{s, s', s*} >= 4",
        comp_cost >= Rat::int(4),
        format!("got {comp_cost}"),
    );

    // late merging: all pairs merge at 2
    let names: Vec<String> = inst
        .terminals()
        .iter()
        .map(|&t| inst.name(t).to_string())
        .collect();
    let n = names.len();
    let mut times = vec![Rat::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                times[i * n + j] = Rat::int(2);
            }
        }
    }
    let plan = MergePlan::new(names, times)?;
    let (trace, _) = growth::run(inst, &plan)?;
    let target = Rat::new(7, 6) + &unit;
    for (term, name) in [(s, "s"), (sp, "s'")] {
        let ti = inst.terminal_index(term).unwrap();
        let atf = trace.atf_set(1 << ti, w)?;
        check(
            &mut checks,
            &format!("atf({name}, w) = 7/6 + 1/(6k)"),
            atf == Some(target.clone()),
            format!("got {atf:?}"),
        );
    }
    let qi = inst.terminal_index(sq).unwrap();
    let atf_star = trace.atf_set(1 << qi, w)?;
    check(
        &mut checks,
        "min(atf(s*, w), merge(s*, s)) <= 7/6 + 1/(6k)",
        atf_star.as_ref().map(|t| *t <= target).unwrap_or(false)
            || Rat::int(2) <= target,
        format!("got {atf_star:?}"),
    );

    let mst = inst.is_mst_optimal(3)?;
    check(
        &mut checks,
        "gadget is MST-optimal",
        mst.optimal_up_to_cap && mst.conclusive,
        format!("cap {}", mst.cap),
    );
    Ok(GadgetReport { checks })
}

/// Degenerate check: under a merge-at-zero plan the gadget claims are
/// vacuous and the run terminates at time 0.
pub fn verify_three_x_degenerate(k: i64) -> Result<GadgetReport> {
    let g = three_x_gadget(k)?;
    let plan = MergePlan::trivial(vec![g.s.clone(), g.s_star.clone()]);
    let (trace, dual) = growth::run(&g.instance, &plan)?;
    let mut checks = Vec::new();
    check(
        &mut checks,
        "merge-at-zero run terminates immediately",
        trace.end_time == Rat::ZERO && dual.objective == Rat::ZERO,
        format!("end {} objective {}", trace.end_time, dual.objective),
    );
    Ok(GadgetReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn three_x_structure() {
        let g = three_x_gadget(1).unwrap();
        // s, s*, w, x0..x3
        assert_eq!(g.instance.vertex_count(), 7);
        let inst = &g.instance;
        let s = inst.lookup("s").unwrap();
        let w = inst.lookup("w").unwrap();
        assert_eq!(inst.shortest_distance(s, w).unwrap(), rat!(7, 6));
    }

    #[test]
    fn three_x_lemma_k1_and_k3() {
        for k in [1, 3] {
            let report = verify_three_x(k).unwrap();
            for c in &report.checks {
                assert!(c.pass, "k={k}: {} failed: {}", c.name, c.detail);
            }
        }
    }

    #[test]
    fn three_x_contract_pair_drops_tmst_by_two() {
        let g = three_x_gadget(2).unwrap();
        let inst = &g.instance;
        let s = inst.lookup("s").unwrap();
        let q = inst.lookup("s*").unwrap();
        assert_eq!(inst.tmst_cost(), rat!(2));
        let contracted = inst.contract(&[s, q]).unwrap();
        assert_eq!(&inst.tmst_cost() - &contracted.tmst_cost(), rat!(2));
    }

    #[test]
    fn jump_lemma_k1() {
        let report = verify_jump(1).unwrap();
        for c in &report.checks {
            assert!(c.pass, "{} failed: {}", c.name, c.detail);
        }
    }

    #[test]
    fn degenerate_plan_is_vacuous() {
        let report = verify_three_x_degenerate(1).unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn composed_instance_small() {
        // |R| = 4, ε = 1/6 → k = 1
        let names: Vec<String> = (0..4).map(|i| format!("t{i}")).collect();
        let inst = lower_bound_instance(&names, &rat!(1, 6)).unwrap();
        // TMST = 2(|R|-1)
        assert_eq!(inst.tmst_cost(), rat!(6));
        // all pairwise terminal distances exactly 2
        for i in 0..4 {
            for j in (i + 1)..4 {
                let a = inst.lookup(&names[i]).unwrap();
                let b = inst.lookup(&names[j]).unwrap();
                assert_eq!(inst.shortest_distance(a, b).unwrap(), rat!(2));
            }
        }
        // dist(x, center) <= 4 for every terminal and center
        let c = inst.lookup("c0_1").unwrap();
        for n in &names {
            let t = inst.lookup(n).unwrap();
            assert!(inst.shortest_distance(t, c).unwrap() <= rat!(4));
        }
    }

    #[test]
    fn composed_instance_mst_optimal_bounded() {
        let names: Vec<String> = (0..5).map(|i| format!("t{i}")).collect();
        let inst = lower_bound_instance(&names, &rat!(1, 6)).unwrap();
        let res = inst.is_mst_optimal(3).unwrap();
        assert!(res.optimal_up_to_cap, "witness: {:?}", res.witness.map(|w| w.0));
    }

    #[test]
    fn k_for_epsilon_rounding() {
        assert_eq!(k_for_epsilon(&rat!(1, 6)), 1);
        assert_eq!(k_for_epsilon(&rat!(1, 12)), 2);
        assert_eq!(k_for_epsilon(&rat!(1, 7)), 2); // ceil(7/6) = 2
        assert_eq!(k_for_epsilon(&rat!(1)), 1);
    }
}
