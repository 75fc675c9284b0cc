use moatlab_core::instance::Instance;
use moatlab_core::mergeplan::MergePlan;
use moatlab_core::subdivide::{self, subdivide_at, atf_on_original_vertices};
use moatlab_core::growth;
use moatlab_core::rat::Rat;
use moatlab_core::rat;
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(61);
    for round in 0..6 {
        let nv = rng.gen_range(5..9);
        let nt = rng.gen_range(2..4usize.min(nv));
        let mut b = Instance::builder();
        let names: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
        for t in names.iter().take(nt) {
            b.terminal(t);
        }
        let mut edges = vec![];
        for i in 1..nv {
            let j = rng.gen_range(0..i);
            let c = rng.gen_range(1i64..8);
            edges.push((i, j, c));
            b.edge(&names[i], &names[j], rat!(c));
        }
        for _ in 0..2 {
            let i = rng.gen_range(0..nv);
            let j = rng.gen_range(0..nv);
            if i != j {
                let c = rng.gen_range(1i64..8);
                edges.push((i, j, c));
                b.edge(&names[i], &names[j], rat!(c));
            }
        }
        let inst = b.build().unwrap();
        let plan = MergePlan::canonical(&inst).scale(&rat!(7, 6)).scale(&rat!(99, 100));
        let well = subdivide::make_well_subdivided(&inst, &plan, true).unwrap();
        let (t1, d1) = growth::run(&well.instance, &plan).unwrap();
        let cont = subdivide::continuous_run(&inst, &plan).unwrap();
        if d1.objective != cont.dual.objective {
            println!("round {round}: OBJECTIVE mismatch well {} vs cont {}", d1.objective, cont.dual.objective);
        }
        let again = subdivide::make_well_subdivided(&well.instance, &plan, true).unwrap();
        if again.new_vertex_count != 0 {
            println!("round {round}: second pass splits {} more", again.new_vertex_count);
        }
        let base = atf_on_original_vertices(&inst, &well.instance, &t1).unwrap();
        let mut cur = well.instance;
        for outer in 0..3 {
            let mut cuts: Vec<Vec<Rat>> = vec![Vec::new(); cur.edge_count()];
            let mut cutlog = vec![];
            for _ in 0..3 {
                let e = rng.gen_range(0..cur.edge_count());
                let den = rng.gen_range(2i64..5);
                let num = rng.gen_range(1..den);
                cuts[e].push(&cur.edges()[e].cost * rat!(num, den));
                let ed = &cur.edges()[e];
                cutlog.push(format!("{}-{} (cost {}) at {}/{}", cur.name(ed.u), cur.name(ed.v), ed.cost, num, den));
            }
            let sub = subdivide_at(&cur, &cuts).unwrap();
            let (tr, _) = growth::run(&sub.instance, &plan).unwrap();
            let now = atf_on_original_vertices(&inst, &sub.instance, &tr).unwrap();
            if base != now {
                println!("round {round} outer {outer}: edges {:?}", edges);
                println!("cuts: {:?}", cutlog);
                for ti in 0..nt {
                    for v in 0..nv {
                        if base[ti][v] != now[ti][v] {
                            println!("  MISMATCH atf(t{ti}, v{v}): base {:?} now {:?}", base[ti][v], now[ti][v]);
                        }
                    }
                }
                return;
            }
            cur = sub.instance;
        }
        println!("round {round}: ok");
    }
}
