use moatlab_core::instance::Instance;
use moatlab_core::mergeplan::MergePlan;
use moatlab_core::rat::Rat;
use moatlab_core::subdivide;
use moatlab_core::rat;

fn main() {
    let mut b = Instance::builder();
    b.terminal("s1").terminal("s2");
    b.edge("s1", "v", rat!(18))
        .edge("s2", "x", rat!(18))
        .edge("s2", "z", rat!(18))
        .edge("v", "x", rat!(2))
        .edge("x", "z", rat!(4));
    let inst = b.build().unwrap();
    let plan = MergePlan::canonical(&inst).scale(&rat!(7, 6));
    println!("max merge {}", plan.max_merge_time());
    let cont = subdivide::continuous_run(&inst, &plan).unwrap();
    for (e, ed) in inst.edges().iter().enumerate() {
        println!(
            "edge {} {}-{} cost {}: und_tight {:?} snapshot {:?} final fwd {} rev {}",
            e,
            inst.name(ed.u),
            inst.name(ed.v),
            ed.cost,
            cont.und_tight[e],
            cont.u_snapshot[e],
            cont.final_loads[2 * e],
            cont.final_loads[2 * e + 1]
        );
    }
    for (set, d, a) in &cont.amounts {
        println!("set {:b} dir {} amount {}", set, d, a);
    }
    let z = inst.lookup("z").unwrap();
    println!("atf s1 z = {:?}", cont.trace.atf_set(0b01, z));
    println!("atf s2 z = {:?}", cont.trace.atf_set(0b10, z));
    println!("end {}", cont.trace.end_time);
    let _ = Rat::ZERO;
}
