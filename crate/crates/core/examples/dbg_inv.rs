use moatlab_core::instance::{Instance, VertexId};
use moatlab_core::mergeplan::{MergePlan, TermMask};
use moatlab_core::subdivide::{self, subdivide_at};
use moatlab_core::growth::{dir_forward, dir_reverse, dir_sibling, DirEdgeId};
use moatlab_core::rat::Rat;
use moatlab_core::rat;
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(67);
    for round in 0..6 {
        let nv = rng.gen_range(4..8);
        let nt = rng.gen_range(2..4usize.min(nv));
        let mut b = Instance::builder();
        let names: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
        for t in names.iter().take(nt) {
            b.terminal(t);
        }
        for i in 1..nv {
            let j = rng.gen_range(0..i);
            b.edge(&names[i], &names[j], rat!(rng.gen_range(1i64..7)));
        }
        let inst = b.build().unwrap();
        let plan = MergePlan::canonical(&inst).scale(&rat!(7, 6));
        let cont = subdivide::continuous_run(&inst, &plan).unwrap();

        let e = rng.gen_range(0..inst.edge_count());
        let den = rng.gen_range(2i64..5);
        let cu = &inst.edges()[e].cost * rat!(1, den);
        let mut cuts: Vec<Vec<Rat>> = vec![Vec::new(); inst.edge_count()];
        cuts[e].push(cu.clone());
        let sub = subdivide_at(&inst, &cuts).unwrap();
        let cont2 = subdivide::continuous_run(&sub.instance, &plan).unwrap();

        let ed = &inst.edges()[e];
        let (u_name, v_name) = (inst.name(ed.u), inst.name(ed.v));
        let mid = format!("e{e}_s0");
        let su = sub.instance.lookup(u_name).unwrap();
        let sm = sub.instance.lookup(&mid).unwrap();
        let sv = sub.instance.lookup(v_name).unwrap();
        let find_dir = |a: VertexId, bv: VertexId| -> DirEdgeId {
            let (eid, edge) = sub.instance.neighbors(a).iter()
                .find(|(nb, _)| *nb == bv)
                .map(|(_, e2)| (*e2, sub.instance.edge(*e2))).unwrap();
            if edge.u == a { dir_forward(eid) } else { dir_reverse(eid) }
        };
        let d_uv = dir_forward(e as u32);
        let mut sets: Vec<TermMask> = cont.amounts.iter().map(|(s, _, _)| *s)
            .chain(cont2.amounts.iter().map(|(s, _, _)| *s)).collect();
        sets.sort_unstable();
        sets.dedup();
        let mut bad = false;
        for set in sets {
            let c_uw = cont.amount(set, d_uv);
            let c_wu = cont.amount(set, dir_sibling(d_uv));
            let c2_uv = cont2.amount(set, find_dir(su, sm));
            let c2_vw = cont2.amount(set, find_dir(sm, sv));
            let c2_wv = cont2.amount(set, find_dir(sv, sm));
            let c2_vu = cont2.amount(set, find_dir(sm, su));
            let cw = &inst.edges()[e].cost - &cu;
            if c2_uv != c_uw.clone().min(cu.clone()) || c2_vw != (c_uw.clone() - &cu).max(Rat::ZERO)
               || c2_wv != c_wu.clone().min(cw.clone()) || c2_vu != (c_wu.clone() - &cw).max(Rat::ZERO) {
                bad = true;
                println!("round {round}: set {set:b} edge {e} ({u_name}-{v_name}) cost {} split at {cu}", inst.edges()[e].cost);
                println!("  C(u->w)={c_uw} C(w->u)={c_wu}");
                println!("  C'(u->m)={c2_uv} want {}", c_uw.clone().min(cu.clone()));
                println!("  C'(m->w)={c2_vw} want {}", (c_uw.clone() - &cu).max(Rat::ZERO));
                println!("  C'(w->m)={c2_wv} want {}", c_wu.clone().min(cw.clone()));
                println!("  C'(m->u)={c2_vu} want {}", (c_wu - &cw).max(Rat::ZERO));
            }
        }
        if bad {
            println!("instance:");
            for (i, edd) in inst.edges().iter().enumerate() {
                println!("  e{i} {}-{} cost {}", inst.name(edd.u), inst.name(edd.v), edd.cost);
            }
            println!("terminals: {:?}", inst.terminals().iter().map(|&t| inst.name(t)).collect::<Vec<_>>());
            println!("orig amounts:");
            for (s, d, a) in &cont.amounts {
                let (t, h) = moatlab_core::growth::dir_endpoints(&inst, *d);
                println!("  set {:b} ({} -> {}) = {}", s, inst.name(t), inst.name(h), a);
            }
            println!("sub amounts:");
            for (s, d, a) in &cont2.amounts {
                let (t, h) = moatlab_core::growth::dir_endpoints(&sub.instance, *d);
                println!("  set {:b} ({} -> {}) = {}", s, sub.instance.name(t), sub.instance.name(h), a);
            }
            break;
        }
    }
}
