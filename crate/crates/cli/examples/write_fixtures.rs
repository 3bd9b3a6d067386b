//! Regenerates the JSON fixtures under `fixtures/` (or the given directory).
//!
//!     cargo run -p derlab --example write_fixtures -- fixtures

use std::fs;
use std::path::{Path, PathBuf};

use derlab_core::algebra::standard::{dual_numbers, upper_triangular};
use derlab_core::category::{shapes, Cat, CatFunctor};
use derlab_core::complex::{complete_resolution, LazyComplex, PolicyFile};
use derlab_core::diagram::{diagrams_with_objects, Diagram, DiagramMap};
use derlab_core::field::Matrix;
use derlab_core::gorenstein::{is_ginj, is_gproj};
use derlab_core::modules::Module;
use serde::Serialize;

fn write<T: Serialize>(dir: &Path, rel: &str, value: &T) {
    let path = dir.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, serde_json::to_string_pretty(value).unwrap() + "\n").unwrap();
    println!("wrote {}", path.display());
}

/// First enumerated diagram with the given components satisfying `keep`.
fn pick(shape: &Cat, objects: &[Module], nth: usize, keep: impl Fn(&Diagram) -> bool) -> Diagram {
    let alg = objects[0].alg().clone();
    diagrams_with_objects(shape, &alg, objects).into_iter().filter(|d| keep(d)).nth(nth).expect("fixture exists")
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let alg = dual_numbers(2);
    write(&dir, "algebras/dual_numbers.json", &alg.to_file());
    write(&dir, "algebras/triangular.json", &upper_triangular(2).to_file());

    let (e, a, c2) = (shapes::point(), shapes::arrow(), shapes::chain(2));
    let (span, cospan, sq) = (shapes::span(), shapes::cospan(), shapes::square());
    for (file, c) in [("e", &e), ("arrow", &a), ("chain2", &c2), ("span", &span), ("cospan", &cospan), ("square", &sq)] {
        write(&dir, &format!("shapes/{file}.json"), &c.to_file());
    }

    let obj = |c: &Cat, n: &str| c.object_index(n).unwrap();
    let select = |c: &Cat, i: usize| CatFunctor::object(c, i).retarget(&e, c);
    let (_, cospan_in) = shapes::full_subcategory(&sq, &[1, 2, 3]);
    let (_, span_in) = shapes::full_subcategory(&sq, &[0, 1, 2]);
    let m01 = c2.morphism_index("0->1").unwrap();
    let m12 = c2.morphism_index("1->2").unwrap();
    let functors = [
        ("at0", select(&a, 0)),
        ("at1", select(&a, 1)),
        ("arrow_to_e", CatFunctor::to_point(&a)),
        ("span_to_e", CatFunctor::to_point(&span)),
        ("cospan_to_e", CatFunctor::to_point(&cospan)),
        ("cospan_in_square", cospan_in.retarget(&cospan, &sq)),
        ("span_in_square", span_in.retarget(&span, &sq)),
        ("lower_edge", CatFunctor::new(&a, &c2, vec![0, 1], vec![0, 1, m01]).unwrap()),
        ("upper_edge", CatFunctor::new(&a, &c2, vec![1, 2], vec![1, 2, m12]).unwrap()),
        ("id_arrow", CatFunctor::identity(&a)),
        ("apex_of_cospan", select(&cospan, obj(&cospan, "(1,1)"))),
    ];
    for (name, u) in &functors {
        u.validate().unwrap();
        write(&dir, &format!("functors/{name}.json"), &u.to_file());
    }

    let k = Module::trivial(&alg, 1).unwrap();
    let lam = Module::regular(&alg);
    let lam2 = Module::free(&alg, 2);
    let soc = Matrix::from_rows(2, 2, 1, &[vec![0], vec![1]]).unwrap();
    let socle_arrow = Diagram::new(&a, &alg, vec![k.clone(), lam.clone()], vec![soc.clone()]).unwrap();
    let top = Matrix::from_rows(2, 1, 2, &[vec![1, 0]]).unwrap();
    let top_arrow = Diagram::new(&a, &alg, vec![lam.clone(), k.clone()], vec![top]).unwrap();
    let gp = |d: &Diagram| is_gproj(d);
    let gi = |d: &Diagram| is_ginj(d);
    let diagrams: Vec<(&str, Diagram)> = vec![
        ("k_e", Diagram::constant(&e, &k)),
        ("lambda_e", Diagram::constant(&e, &lam)),
        ("k2_e", Diagram::constant(&e, &Module::trivial(&alg, 2).unwrap())),
        ("socle_arrow", socle_arrow.clone()),
        ("top_arrow", top_arrow),
        ("const_k_arrow", Diagram::constant(&a, &k)),
        ("stalk0_arrow", Diagram::stalk(&a, 0, &k)),
        ("stalk_apex_span", Diagram::stalk(&span, obj(&span, "(0,0)"), &k)),
        ("stalk1_arrow", Diagram::stalk(&a, 1, &k)),
        ("free0_k_arrow", Diagram::free_at(&a, 0, &k)),
        ("gproj_arrow_22", pick(&a, &[lam.clone(), lam.clone()], 1, gp)),
        ("ginj_arrow_22", pick(&a, &[lam.clone(), lam.clone()], 1, gi)),
        ("free_span_apex", Diagram::free_at(&span, obj(&span, "(0,0)"), &k)),
        ("cofree_cospan_apex", Diagram::cofree_at(&cospan, obj(&cospan, "(1,1)"), &k)),
        ("free_cospan_left", Diagram::free_at(&cospan, obj(&cospan, "(0,1)"), &k)),
        ("cofree_cospan_left", Diagram::cofree_at(&cospan, obj(&cospan, "(0,1)"), &k)),
        ("free_span_left", Diagram::free_at(&span, obj(&span, "(0,1)"), &k)),
        ("cofree_span_apex", Diagram::cofree_at(&span, obj(&span, "(0,0)"), &k)),
        ("gproj_cospan", pick(&cospan, &[k.clone(), k.clone(), lam2.clone()], 0, gp)),
        ("gproj_span", pick(&span, &[k.clone(), lam.clone(), lam.clone()], 0, gp)),
        ("ginj_span", pick(&span, &[lam2.clone(), k.clone(), k.clone()], 0, gi)),
        ("free_square_corner", Diagram::free_at(&sq, 0, &k)),
        ("cofree_square_corner", Diagram::cofree_at(&sq, 3, &k)),
        ("free_chain_k", Diagram::free_at(&c2, 1, &k)),
        ("socle_chain", pick(&c2, &[k.clone(), lam.clone(), lam.clone()], 0, gp)),
    ];
    for (name, d) in &diagrams {
        write(&dir, &format!("diagrams/{name}.json"), &d.to_file());
    }

    // complexes: a truncated complete resolution and a periodic one over e
    let res = complete_resolution(&socle_arrow).unwrap();
    write(&dir, "complexes/resolution_socle_arrow.json", &res.to_file(-3, 3).unwrap());
    let le = Diagram::constant(&e, &lam);
    let x = DiagramMap::new(&le, &le, vec![lam.action()[1].clone()]).unwrap();
    let per = LazyComplex::periodic(&e, &alg, vec![le.clone()], vec![x]).unwrap();
    let mut f = per.to_file(0, 0).unwrap();
    f.diffs.insert("0".into(), per.to_file(0, 1).unwrap().diffs["0"].clone());
    f.policy = PolicyFile::Periodic { period: 1 };
    write(&dir, "complexes/periodic_lambda.json", &f);
    let free = Diagram::free_at(&a, 0, &lam);
    let two = LazyComplex::bounded(&a, &alg, 0, vec![free.clone(), free.clone()], vec![DiagramMap::identity(&free)]).unwrap();
    write(&dir, "complexes/cone_of_identity.json", &two.to_file(0, 1).unwrap());
}
