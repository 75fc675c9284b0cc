use moatlab_core::instance::Instance;
use moatlab_core::mergeplan::MergePlan;
use moatlab_core::subdivide::{self, subdivide_at};
use moatlab_core::growth::{self, dir_forward, dir_reverse};
use moatlab_core::rat::Rat;
use moatlab_core::rat;

fn main() {
    // round-1 instance from the failing seed
    let mut b = Instance::builder();
    b.terminal("v0").terminal("v1");
    b.edge("v1", "v0", rat!(6))
        .edge("v2", "v1", rat!(7))
        .edge("v3", "v1", rat!(4))
        .edge("v4", "v3", rat!(3))
        .edge("v5", "v3", rat!(4));
    let inst = b.build().unwrap();
    let plan = MergePlan::canonical(&inst).scale(&rat!(7, 6)).scale(&rat!(99, 100));
    println!("merge = {}", plan.max_merge_time());
    let well = subdivide::make_well_subdivided(&inst, &plan, true).unwrap();
    println!("well cuts: {:?}", well.cuts);
    let wi = &well.instance;
    for (e, ed) in wi.edges().iter().enumerate() {
        println!("well edge {e}: {}-{} cost {}", wi.name(ed.u), wi.name(ed.v), ed.cost);
    }
    // apply the failing random cuts: v1-e1_s0 at 1/2 and 3/4; v1-e2_s0 at 1/4
    let mut cuts: Vec<Vec<Rat>> = vec![Vec::new(); wi.edge_count()];
    for (a, bn, frac) in [("v1", "e1_s0", rat!(1, 2)), ("v1", "e1_s0", rat!(3, 4)), ("v1", "e2_s0", rat!(1, 4))] {
        let av = wi.lookup(a).unwrap();
        let bv = wi.lookup(bn).unwrap();
        let (eid, ed) = wi.neighbors(av).iter().find(|(nb, _)| *nb == bv).map(|(_, e)| (*e, wi.edge(*e))).unwrap();
        // position measured from Edge.u
        let pos = if ed.u == av { &ed.cost * &frac } else { &ed.cost * (Rat::ONE - &frac) };
        cuts[eid as usize].push(pos);
    }
    let sub = subdivide_at(wi, &cuts).unwrap();
    let si = &sub.instance;
    let (tr, _) = growth::run(si, &plan).unwrap();
    let v1 = si.lookup("v1").unwrap();
    let t1 = si.terminal_index(v1).unwrap();
    for v in 0..si.vertex_count() as u32 {
        if let Some(t) = &tr.atf.as_ref().unwrap()[t1][v as usize] {
            println!("atf(v1, {}) = {}", si.name(v), t);
        }
    }
    for (e, ed) in si.edges().iter().enumerate() {
        let f = &tr.tight_time[dir_forward(e as u32) as usize];
        let r = &tr.tight_time[dir_reverse(e as u32) as usize];
        println!("edge {}-{} cost {}: fwd {:?} rev {:?}", si.name(ed.u), si.name(ed.v), ed.cost, f, r);
    }
}
