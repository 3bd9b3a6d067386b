//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//!     cargo test -p derlab-core --test acceptance

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use derlab_core::algebra::standard::{dual_numbers, upper_triangular};
use derlab_core::algebra::{Algebra, AlgebraFile};
use derlab_core::category::{shapes, Cat, CatFunctor, CategoryFile, DirectCategory, FunctorFile};
use derlab_core::complex::{
    complete_resolution, cone, is_contractible_on, module_complex, sod_decompose, ComplexFile, ComplexMap, LazyComplex,
    Support,
};
use derlab_core::dgkan::{
    bar_resolution, crosscheck_kan, der4_check, representable_weight, weight_cone, weight_shift, weighted_holim,
    KanDirection, LeftKIModule,
};
use derlab_core::diagram::{
    colimit, diagrams_with_objects, ext1_dim, hom_dim_diagrams, hom_space_diagrams, projective_cover_diagram,
    random_diagram_with_objects, Diagram, DiagramConflation, DiagramFile, DiagramMap,
};
use derlab_core::field::Matrix;
use derlab_core::gorenstein::{
    approx_gproj, colim_gproj, embed_gproj_into_proj, ginj_right_kan, gproj_left_kan, hull_ginj, is_ginj, is_gproj,
    is_wtriv, stable_roundtrip, GColimit,
};
use derlab_core::homotopy::{is_stable_iso_diagrams, is_weak_equivalence, loop_via_square};
use derlab_core::modules::{enumerate_modules, is_self_injective, is_stable_iso, Conflation, Module, ModuleMap, SearchBudget};
use derlab_core::par;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

const MINUTE: Duration = Duration::from_secs(60);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

// ---------------------------------------------------------------- corpus

struct Corpus {
    alg: Arc<Algebra>,
    shapes: BTreeMap<String, Cat>,
    functors: BTreeMap<String, CatFunctor>,
    diagrams: BTreeMap<String, Diagram>,
    complexes: BTreeMap<String, LazyComplex>,
    root: PathBuf,
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn stems(dir: &Path) -> Vec<(String, PathBuf)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), p))
        .collect();
    out.sort();
    out
}

fn corpus() -> &'static Corpus {
    static C: OnceLock<Corpus> = OnceLock::new();
    C.get_or_init(|| {
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
        let alg = Algebra::from_file(&read::<AlgebraFile>(&root.join("algebras/dual_numbers.json"))).unwrap();
        let mut by_name = BTreeMap::new();
        for (_, p) in stems(&root.join("shapes")) {
            let c: Cat = Arc::new(DirectCategory::from_file(&read::<CategoryFile>(&p)).unwrap());
            by_name.insert(c.name().to_string(), c);
        }
        let mut functors = BTreeMap::new();
        for (n, p) in stems(&root.join("functors")) {
            let f: FunctorFile = read(&p);
            let u = CatFunctor::from_file(&f, &by_name[&f.source], &by_name[&f.target]).unwrap();
            functors.insert(n, u);
        }
        let mut diagrams = BTreeMap::new();
        for (n, p) in stems(&root.join("diagrams")) {
            let f: DiagramFile = read(&p);
            diagrams.insert(n, Diagram::from_file(&f, &by_name[&f.shape], &alg).unwrap());
        }
        let mut complexes = BTreeMap::new();
        for (n, p) in stems(&root.join("complexes")) {
            let f: ComplexFile = read(&p);
            complexes.insert(n, f.load(&by_name[&f.shape], &alg).unwrap());
        }
        Corpus { alg, shapes: by_name, functors, diagrams, complexes, root }
    })
}

/// Every module structure of dimension ≤ 2: 0, k, k², and the conjugates of Λ.
fn small_modules(alg: &Arc<Algebra>) -> Vec<Module> {
    (0..=2).flat_map(|d| enumerate_modules(alg, d)).collect()
}

fn tuples(choices: &[Module], n: usize) -> Vec<Vec<Module>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| choices.iter().map(move |m| [t.clone(), vec![m.clone()]].concat())).collect();
    }
    out
}

/// All diagrams over [1] and the cospan with components of dimension ≤ 2.
fn enumerated() -> &'static Vec<Diagram> {
    static E: OnceLock<Vec<Diagram>> = OnceLock::new();
    E.get_or_init(|| {
        let alg = dual_numbers(2);
        let mods = small_modules(&alg);
        let mut out = Vec::new();
        for shape in [shapes::arrow(), shapes::cospan()] {
            let ts = tuples(&mods, shape.n_objects());
            for ds in par::map(&ts, |t| diagrams_with_objects(&shape, &alg, t)) {
                out.extend(ds);
            }
        }
        out
    })
}

fn iso_reps(alg: &Arc<Algebra>) -> Vec<Module> {
    vec![Module::zero(alg), Module::trivial(alg, 1).unwrap(), Module::regular(alg), Module::trivial(alg, 2).unwrap()]
}

fn random_objects<R: Rng>(shape: &Cat, alg: &Arc<Algebra>, rng: &mut R) -> Vec<Module> {
    let reps = iso_reps(alg);
    (0..shape.n_objects()).map(|_| reps.choose(rng).unwrap().clone()).collect()
}

/// A random diagram of the class, falling back to the GProj approximation
/// (or its dual) when rejection sampling does not hit one.
fn random_in_class<R: Rng>(shape: &Cat, alg: &Arc<Algebra>, gproj: bool, rng: &mut R) -> Diagram {
    for _ in 0..40 {
        let d = random_diagram_with_objects(shape, alg, &random_objects(shape, alg, rng), rng);
        if !d.is_zero() && (if gproj { is_gproj(&d) } else { is_ginj(&d) }) {
            return d;
        }
    }
    let d = random_diagram_with_objects(shape, alg, &random_objects(shape, alg, rng), rng);
    if gproj {
        approx_gproj(&d).unwrap().conflation.middle().clone()
    } else {
        hull_ginj(&d).unwrap().conflation.middle().clone()
    }
}

/// Square, then alternating random 4-object posets and free categories on DAGs.
fn fuzz_shapes(n: usize, seed: u64) -> Vec<Cat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![shapes::square()];
    while out.len() < n {
        let pairs: Vec<(usize, usize)> =
            (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).filter(|_| rng.gen_bool(0.5)).collect();
        let name = format!("fuzz{}", out.len());
        let c = if out.len() % 2 == 1 { shapes::poset(&name, 4, &pairs) } else { shapes::free_on_dag(&name, 4, &pairs) };
        out.push(c.unwrap());
    }
    out
}

// ---------------------------------------------------------------- criteria

fn c1_recognition() -> Check {
    let all = enumerated();
    let lam = Module::regular(&dual_numbers(2));
    let mismatches: Vec<usize> = par::map_range(all.len(), |n| {
        let x = &all[n];
        let oracle = (0..x.shape().n_objects())
            .all(|j| ext1_dim(x, &Diagram::stalk(x.shape(), j, &lam)).expect("ext1") == 0);
        (oracle != is_gproj(x)).then_some(n)
    })
    .into_iter()
    .flatten()
    .collect();
    ensure(mismatches.is_empty(), || format!("{} disagreements, first {:?}", mismatches.len(), all[mismatches[0]]))?;
    let g = all.iter().filter(|x| is_gproj(x)).count();
    Ok(format!("{} diagrams, {g} GProj, full agreement", all.len()))
}

/// Λ-linear invertible comparison from the pointwise colimit, compatible with the legs.
fn colimit_witness(x: &Diagram, g: &GColimit) -> Result<(), String> {
    let plain = colimit(x);
    let phi = plain.descend(&g.legs, g.module.dim());
    let m = ModuleMap::new(&plain.module, &g.module, phi).map_err(e2s)?;
    ensure(m.matrix.inverse().is_some(), || "comparison is not invertible".into())?;
    for (i, leg) in plain.legs.iter().enumerate() {
        ensure(&m.matrix.mul(leg) == &g.legs[i], || format!("leg {i} does not commute"))?;
    }
    Ok(())
}

fn induced(f: &DiagramMap, a: &GColimit, b: &GColimit) -> Result<ModuleMap, String> {
    let cocone: Vec<Matrix> = b.legs.iter().zip(&f.comps).map(|(l, c)| l.mul(c)).collect();
    let m = a.descend(&cocone, b.module.dim()).ok_or("cocone does not descend")?;
    ModuleMap::new(&a.module, &b.module, m).map_err(e2s)
}

fn c2_colimits() -> Check {
    let gp: Vec<&Diagram> = enumerated().iter().filter(|x| is_gproj(x)).collect();
    let errs: Vec<String> = par::map(&gp, |x| colim_gproj(x).map_err(e2s).and_then(|g| colimit_witness(x, &g)).err())
        .into_iter()
        .flatten()
        .collect();
    ensure(errs.is_empty(), || format!("colimit comparison: {}", errs[0]))?;
    // conflations with all three terms GProj
    let mut confl: Vec<DiagramConflation> = Vec::new();
    for x in gp.iter().filter(|x| !x.is_zero()) {
        confl.push(embed_gproj_into_proj(x).map_err(e2s)?);
        confl.push(projective_cover_diagram(x));
    }
    confl.retain(|c| [c.first(), c.middle(), c.last()].into_iter().all(is_gproj));
    ensure(confl.len() >= 50, || format!("only {} conflations", confl.len()))?;
    let bad: Vec<String> = par::map(&confl, |c| {
        let run = || -> Result<(), String> {
            c.verify().map_err(e2s)?;
            let [a, b, d] = [c.first(), c.middle(), c.last()].map(|x| colim_gproj(x).map_err(e2s));
            let (a, b, d) = (a?, b?, d?);
            let s = Conflation { left: induced(&c.left, &a, &b)?, right: induced(&c.right, &b, &d)? };
            s.verify().map_err(e2s)
        };
        run().err()
    })
    .into_iter()
    .flatten()
    .collect();
    ensure(bad.is_empty(), || format!("colimit sequence not a conflation: {}", bad[0]))?;
    Ok(format!("{} colimits agree, {} conflations stay exact", gp.len(), confl.len()))
}

fn vectors_rank(maps: &[DiagramMap], p: u32) -> usize {
    if maps.is_empty() {
        return 0;
    }
    let cols: Vec<Vec<u32>> = maps.iter().map(|m| m.vectorize()).collect();
    Matrix::from_cols(p, cols[0].len(), &cols).rank()
}

fn adjunction_functors() -> Vec<CatFunctor> {
    corpus().functors.values().cloned().collect()
}

fn left_sample(u: &CatFunctor, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let alg = &corpus().alg;
    let x = random_in_class(&u.source, alg, true, rng);
    let y = random_diagram_with_objects(&u.target, alg, &random_objects(&u.target, alg, rng), rng);
    let y2 = random_diagram_with_objects(&u.target, alg, &random_objects(&u.target, alg, rng), rng);
    let k = gproj_left_kan(u, &x).map_err(e2s)?;
    let unit = &k.adjunction_map;
    ensure(unit.is_natural(), || "unit is not natural".into())?;
    let hom = hom_space_diagrams(&k.diagram, &y).map_err(e2s)?;
    let rhs = hom_dim_diagrams(&x, &y.restrict(u)).map_err(e2s)?;
    ensure(hom.len() == rhs, || format!("Hom(u_! x, y) = {} but Hom(x, u^* y) = {rhs}", hom.len()))?;
    let transposed: Vec<DiagramMap> = hom.iter().map(|psi| psi.restrict(u).after(unit)).collect();
    ensure(vectors_rank(&transposed, x.p()) == hom.len(), || "transposition is not injective".into())?;
    // naturality in y
    for g in hom_space_diagrams(&y, &y2).map_err(e2s)?.iter().take(4) {
        for (psi, t) in hom.iter().zip(&transposed) {
            let lhs = g.after(psi).restrict(u).after(unit);
            ensure(lhs == g.restrict(u).after(t), || "naturality in y fails".into())?;
        }
    }
    // naturality in x: every endomorphism a extends to u_! a with u^*(u_! a)∘η = η∘a
    for a in hom_space_diagrams(&x, &x).map_err(e2s)?.iter().take(4) {
        ensure(extend_along_unit(u, unit, &k.diagram, &unit.after(a))?,|| "an endomorphism of x does not extend along the unit".into())?;
    }
    Ok(())
}

/// Is there `b: ux → ux` with `u^* b ∘ η = t`?
fn extend_along_unit(u: &CatFunctor, unit: &DiagramMap, ux: &Diagram, t: &DiagramMap) -> Result<bool, String> {
    let hom = hom_space_diagrams(ux, ux).map_err(e2s)?;
    let p = ux.p();
    if hom.is_empty() {
        return Ok(t.is_zero());
    }
    let cols: Vec<Vec<u32>> = hom.iter().map(|b| b.restrict(u).after(unit).vectorize()).collect();
    let a = Matrix::from_cols(p, cols[0].len(), &cols);
    Ok(a.solve(&Matrix::column_vector(p, &t.vectorize())).is_some())
}

fn right_sample(u: &CatFunctor, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let alg = &corpus().alg;
    let y = random_in_class(&u.source, alg, false, rng);
    let x = random_diagram_with_objects(&u.target, alg, &random_objects(&u.target, alg, rng), rng);
    let x0 = random_diagram_with_objects(&u.target, alg, &random_objects(&u.target, alg, rng), rng);
    let k = ginj_right_kan(u, &y).map_err(e2s)?;
    let counit = &k.adjunction_map;
    ensure(counit.is_natural(), || "counit is not natural".into())?;
    let hom = hom_space_diagrams(&x, &k.diagram).map_err(e2s)?;
    let rhs = hom_dim_diagrams(&x.restrict(u), &y).map_err(e2s)?;
    ensure(hom.len() == rhs, || format!("Hom(x, u_* y) = {} but Hom(u^* x, y) = {rhs}", hom.len()))?;
    let transposed: Vec<DiagramMap> = hom.iter().map(|phi| counit.after(&phi.restrict(u))).collect();
    ensure(vectors_rank(&transposed, y.p()) == hom.len(), || "transposition is not injective".into())?;
    for g in hom_space_diagrams(&x0, &x).map_err(e2s)?.iter().take(4) {
        for (phi, t) in hom.iter().zip(&transposed) {
            let lhs = counit.after(&phi.after(g).restrict(u));
            ensure(lhs == t.after(&g.restrict(u)), || "naturality in x fails".into())?;
        }
    }
    Ok(())
}

fn c3_adjunction() -> Check {
    let fs = adjunction_functors();
    let n = 24;
    let results: Vec<Result<(), String>> = par::map_range(2 * n, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + s as u64);
        let u = &fs[s % fs.len()];
        let r = if s < n { left_sample(u, &mut rng) } else { right_sample(u, &mut rng) };
        r.map_err(|e| format!("sample {s} ({} -> {}): {e}", u.source.name(), u.target.name()))
    });
    let errs: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    ensure(errs.is_empty(), || errs[0].clone())?;
    Ok(format!("{n} left and {n} right samples over {} functors", fs.len()))
}

fn c4_cotorsion() -> Check {
    let c = corpus();
    let mut produced: Vec<(Diagram, Diagram)> = Vec::new(); // (GProj, WTriv) per fixture
    for (name, d) in &c.diagrams {
        let a = approx_gproj(d).map_err(|e| format!("{name}: {e:?}"))?;
        a.verify().map_err(|e| format!("{name}: {e:?}"))?;
        let h = hull_ginj(d).map_err(|e| format!("{name}: {e:?}"))?;
        h.verify().map_err(|e| format!("{name}: {e:?}"))?;
        let (w, g) = (a.conflation.first(), a.conflation.middle());
        let (y, w2) = (h.conflation.middle(), h.conflation.last());
        ensure(is_wtriv(w) && is_gproj(g) && is_ginj(y) && is_wtriv(w2), || format!("{name}: class tags"))?;
        ensure(a.conflation.last().dims() == d.dims() && h.conflation.first().dims() == d.dims(), || {
            format!("{name}: approximation does not end at the input")
        })?;
        produced.push((g.clone(), w.clone()));
        produced.push((g.clone(), w2.clone()));
    }
    let mut gs: Vec<Diagram> = c.diagrams.values().filter(|d| is_gproj(d)).cloned().collect();
    gs.extend(produced.iter().map(|(g, _)| g.clone()));
    let ws: Vec<&Diagram> = produced.iter().map(|(_, w)| w).collect();
    let pairs: Vec<(&Diagram, &Diagram)> =
        gs.iter().flat_map(|g| ws.iter().filter(|w| w.shape() == g.shape()).map(move |w| (g, *w))).collect();
    let bad: Vec<usize> = par::map_range(pairs.len(), |n| (ext1_dim(pairs[n].0, pairs[n].1).unwrap() != 0).then_some(n))
        .into_iter()
        .flatten()
        .collect();
    ensure(bad.is_empty(), || format!("{} pairs with Ext¹(G, W) ≠ 0", bad.len()))?;
    Ok(format!("{} fixtures approximated, {} Ext¹(G, W) pairs vanish", c.diagrams.len(), pairs.len()))
}

fn c5_roundtrip() -> Check {
    let c = corpus();
    let gs: Vec<(&String, &Diagram)> = c.diagrams.iter().filter(|(_, d)| is_gproj(d)).collect();
    ensure(gs.len() >= 10, || format!("only {} GProj fixtures", gs.len()))?;
    for (name, g) in &gs {
        let theta = stable_roundtrip(g).map_err(|e| format!("{name}: {e:?}"))?;
        let we = is_weak_equivalence(&theta).map_err(e2s)?;
        let iso = is_stable_iso_diagrams(g, &theta.target, SearchBudget::default()).map_err(e2s)?;
        ensure(we.is_true() && iso.is_true(), || format!("{name}: comparison {} / search {}", we.label(), iso.label()))?;
    }
    Ok(format!("{} GProj fixtures round-trip, no unknown verdicts", gs.len()))
}

/// Longest string of composable non-identity morphisms, by depth-first search.
fn longest_string(c: &Cat) -> usize {
    fn from(c: &Cat, obj: usize, memo: &mut Vec<Option<usize>>) -> usize {
        if let Some(v) = memo[obj] {
            return v;
        }
        let v = c.non_identity().filter(|&f| c.src(f) == obj).map(|f| 1 + from(c, c.tgt(f), memo)).max().unwrap_or(0);
        memo[obj] = Some(v);
        v
    }
    let mut memo = vec![None; c.n_objects()];
    (0..c.n_objects()).map(|i| from(c, i, &mut memo)).max().unwrap_or(0)
}

/// Exactness of `⋯ → B_1(c) → B_0(c) → m(c) → 0` by comparing kernels and images.
fn exact_at(maps: &[Matrix]) -> bool {
    // maps[0] = augmentation, maps[k] = B_k → B_{k-1}
    if !maps[0].is_surjective() {
        return false;
    }
    for k in 0..maps.len() {
        let ker = maps[k].kernel_basis();
        let img = maps.get(k + 1).cloned().unwrap_or_else(|| Matrix::zeros(maps[k].p(), maps[k].cols(), 0));
        if !maps[k].mul(&img).is_zero() {
            return false;
        }
        let both = Matrix::hstack(maps[k].p(), maps[k].cols(), &[&ker, &img]);
        if both.rank() != ker.cols() || img.rank() != ker.cols() {
            return false;
        }
    }
    true
}

fn c6_bar() -> Check {
    let shapes = fuzz_shapes(10, 61);
    let n = 36;
    let results: Vec<Result<(), String>> = par::map_range(n, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + s as u64);
        let shape = &shapes[s % shapes.len()];
        let p = [2, 3][s % 2];
        let m = LeftKIModule::random(shape, p, 2, &mut rng);
        let r = bar_resolution(&m).map_err(e2s)?;
        for c in 0..shape.n_objects() {
            let mut maps = vec![r.augmentation_at(c)];
            maps.extend((0..r.terms.len() - 1).map(|k| r.diff_at(k, c)));
            ensure(exact_at(&maps), || format!("not exact at {} over {}", shape.objects()[c], shape.name()))?;
        }
        let bound = longest_string(shape);
        ensure(r.length() <= bound, || format!("length {} exceeds {bound} over {}", r.length(), shape.name()))
    });
    let errs: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    ensure(errs.is_empty(), || errs[0].clone())?;
    Ok(format!("{n} random modules over {} fuzz shapes", shapes.len()))
}

fn gproj_complexes() -> Vec<LazyComplex> {
    let c = corpus();
    c.diagrams.values().filter(|d| is_gproj(d)).map(|d| complete_resolution(d).unwrap()).collect()
}

fn c7_weights() -> Check {
    const WIN: (i64, i64) = (-3, 3);
    let mut count = 0;
    // representable weight: exact evaluation
    for t in gproj_complexes() {
        let shape = t.shape().clone();
        for j in 0..shape.n_objects() {
            let h = weighted_holim(&representable_weight(&shape, j, t.p()), &t).map_err(e2s)?;
            for m in WIN.0..=WIN.1 {
                let (ht, tt) = (h.term(m).map_err(e2s)?, t.term(m).map_err(e2s)?);
                ensure(ht.obj(0) == tt.obj(j), || format!("term {m} differs at {}", shape.objects()[j]))?;
                let (hd, td) = (h.diff(m).map_err(e2s)?, t.diff(m).map_err(e2s)?);
                ensure(hd.comps[0] == td.comps[j], || format!("differential {m} differs at {}", shape.objects()[j]))?;
            }
            count += 1;
        }
    }
    // shift weight: ψ_m = (−1)^{mn} is a chain isomorphism onto t[n]
    let mut samples = Vec::new();
    for p in [2, 3, 5] {
        let alg = dual_numbers(p);
        let k = Module::trivial(&alg, 1).unwrap();
        samples.push(complete_resolution(&Diagram::constant(&shapes::point(), &k)).map_err(e2s)?);
        let l = Module::regular(&alg);
        let x = l.action()[1].clone();
        samples.push(module_complex(&alg, 0, vec![l.clone(), l.clone(), l], vec![x.clone(), x]).map_err(e2s)?);
    }
    for t in &samples {
        for n in -2..=2i64 {
            let h = weighted_holim(&weight_shift(n, t.p()), t).map_err(e2s)?;
            let s = t.shift(n);
            let p = t.p();
            let (h1, s1) = (h.clone(), s.clone());
            let psi = ComplexMap::from_generator(&h, &s, move |m| {
                let d = h1.term(m)?.obj(0).dim();
                let _ = &s1;
                Ok(vec![Matrix::scalar(p, d, if (m * n).rem_euclid(2) == 0 { 1 } else { -1 })])
            });
            psi.check_window(WIN.0, WIN.1).map_err(|e| format!("shift {n}: {e:?}"))?;
            for m in WIN.0..=WIN.1 {
                ensure(psi.at(m).map_err(e2s)?.is_iso(), || format!("shift {n}: degree {m} is not iso"))?;
            }
            count += 1;
        }
    }
    // cone weight: holim over [1] against the shifted cone
    for t in &samples {
        for which in 0..3 {
            let (h, shifted) = cone_pair(t, which)?;
            let psi = cone_iso(&h, &shifted, t);
            psi.check_window(WIN.0, WIN.1).map_err(|e| format!("cone: {e:?}"))?;
            for m in WIN.0..=WIN.1 {
                let a = psi.at(m).map_err(e2s)?;
                ensure(a.is_iso(), || format!("cone: degree {m} is not iso"))?;
                let (ht, ct) = (h.term(m).map_err(e2s)?, shifted.term(m).map_err(e2s)?);
                ensure(ht.dims() == ct.dims(), || format!("cone: degree {m} dimensions"))?;
            }
            count += 1;
        }
    }
    Ok(format!("{count} weighted limits match exactly"))
}

/// The [1]-shaped complex `t → t` given by identity, zero or multiplication by x,
/// its weighted limit against the cone weight, and the shifted cone of the map.
fn cone_pair(t: &LazyComplex, which: usize) -> Result<(LazyComplex, LazyComplex), String> {
    let alg = t.alg().clone();
    let p = t.p();
    let x = alg.regular_action().get(1).cloned();
    let t0 = t.clone();
    let comp = move |k: i64| -> derlab_core::Result<Matrix> {
        let m = t0.term(k)?.obj(0).clone();
        Ok(match which {
            0 => Matrix::identity(p, m.dim()),
            1 => Matrix::zeros(p, m.dim(), m.dim()),
            _ => match &x {
                Some(_) => m.action()[1].clone(),
                None => Matrix::identity(p, m.dim()),
            },
        })
    };
    let comp = Arc::new(comp);
    let c1 = comp.clone();
    let f = ComplexMap::from_generator(t, t, move |k| Ok(vec![c1(k)?]));
    f.check_window(-4, 4).map_err(|e| format!("map {which}: {e:?}"))?;
    let a = shapes::arrow();
    let (ta, tb, c2, a1, alg2) = (t.clone(), t.clone(), comp, a.clone(), alg.clone());
    let big = LazyComplex::from_generators(
        &a,
        &alg,
        Support::Derived("cone input".into()),
        move |k| {
            let m = ta.term(k)?.obj(0).clone();
            Diagram::new(&a1, &alg2, vec![m.clone(), m], vec![c2(k)?])
        },
        move |k| Ok(vec![tb.diff(k)?.comps[0].clone(); 2]),
    );
    let h = weighted_holim(&weight_cone(p), &big).map_err(e2s)?;
    Ok((h, cone(&f).shift(-1)))
}

/// `ψ_m(a, b) = ((−1)^{m−1} b, a)` from `(t^m, t^{m−1})` to `(t^{m−1}, t^m)`.
fn cone_iso(h: &LazyComplex, shifted: &LazyComplex, t: &LazyComplex) -> ComplexMap {
    let t = t.clone();
    let p = t.p();
    ComplexMap::from_generator(h, shifted, move |m| {
        let d0 = t.term(m)?.obj(0).dim();
        let d1 = t.term(m - 1)?.obj(0).dim();
        let mut out = Matrix::zeros(p, d0 + d1, d0 + d1);
        let s = if (m - 1).rem_euclid(2) == 0 { 1 } else { -1 };
        out.set_block(0, d0, &Matrix::scalar(p, d1, s));
        out.set_block(d1, 0, &Matrix::identity(p, d0));
        Ok(vec![out])
    })
}

fn c8_der4() -> Check {
    let fs = adjunction_functors();
    let n = 32;
    let results: Vec<Result<(), String>> = par::map_range(n, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + s as u64);
        let u = &fs[s % fs.len()];
        let x = random_in_class(&u.source, &corpus().alg, true, &mut rng);
        let t = complete_resolution(&x).map_err(e2s)?;
        let j = rng.gen_range(0..u.target.n_objects());
        let r = der4_check(u, j, &t, -2, 2).map_err(e2s)?;
        ensure(r.passed(), || format!("sample {s} at {}: {r:?}", r.object))
    });
    let errs: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    ensure(errs.is_empty(), || errs[0].clone())?;
    Ok(format!("{n} random instances, underived and derived comparisons hold"))
}

fn c9_crosscheck() -> Check {
    let c = corpus();
    let scenario: serde_json::Value = read(&c.root.join("scenarios/regression.json"));
    let budget = SearchBudget {
        budget: scenario["budget"].as_u64().unwrap_or(4096) as usize,
        seed: scenario["seed"].as_u64().unwrap_or(0),
    };
    let items: Vec<(String, String, KanDirection)> = scenario["suites"]
        .as_array()
        .ok_or("no suites")?
        .iter()
        .filter(|s| s["suite"] == "crosscheck")
        .flat_map(|s| s["items"].as_array().cloned().unwrap_or_default())
        .map(|i| {
            let dir = if i["direction"] == "right" { KanDirection::Right } else { KanDirection::Left };
            (i["functor"].as_str().unwrap().to_string(), i["diagram"].as_str().unwrap().to_string(), dir)
        })
        .collect();
    ensure(items.len() >= 15, || format!("only {} pairs", items.len()))?;
    let mut kinds = BTreeMap::<&str, usize>::new();
    for (f, _, _) in &items {
        let u = &c.functors[f];
        let emb = u.is_fully_faithful() && u.is_injective_on_objects();
        if u.target.n_objects() == 1 && u.source.n_objects() > 1 {
            *kinds.entry("projection").or_default() += 1;
        }
        if emb && u.is_sieve().unwrap_or(false) {
            *kinds.entry("sieve").or_default() += 1;
        }
        if emb && u.is_cosieve().unwrap_or(false) {
            *kinds.entry("cosieve").or_default() += 1;
        }
        if u.target.name() == "square" {
            *kinds.entry("square").or_default() += 1;
        }
    }
    for k in ["projection", "sieve", "cosieve", "square"] {
        ensure(kinds.contains_key(k), || format!("corpus has no {k} case"))?;
    }
    let results = par::map(&items, |(f, d, dir)| {
        crosscheck_kan(&c.functors[f], &c.diagrams[d], *dir, budget)
            .map_err(|e| format!("{f} {d} {dir:?}: {e:?}"))
            .map(|r| (r.verdict.label(), format!("{f} {d} {dir:?}")))
    });
    for r in results {
        let (label, what) = r?;
        ensure(label == "true", || format!("{what}: verdict {label}"))?;
    }
    Ok(format!("{} pairs agree ({kinds:?})", items.len()))
}

fn c10_stability() -> Check {
    let alg = dual_numbers(2);
    let mods: Vec<Module> = (0..=4).flat_map(|d| enumerate_modules(&alg, d)).collect();
    let labels: Vec<Result<&'static str, String>> =
        par::map(&mods, |m| loop_via_square(m, SearchBudget::default()).map(|r| r.verdict.label()).map_err(e2s));
    let mut counts = BTreeMap::<&str, usize>::new();
    for l in labels {
        *counts.entry(l?).or_default() += 1;
    }
    ensure(counts.keys().all(|&k| k == "true"), || format!("verdicts {counts:?}"))?;
    Ok(format!("{} modules of dimension ≤ 4, all stably isomorphic to their syzygy", mods.len()))
}

fn c11_sod() -> Check {
    const WIN: (i64, i64) = (-2, 2);
    let c = corpus();
    for (name, x) in &c.complexes {
        let sod = sod_decompose(x).map_err(|e| format!("{name}: {e:?}"))?;
        let r = sod.verify(WIN.0, WIN.1).map_err(|e| format!("{name}: {e:?}"))?;
        ensure(r.passed(), || format!("{name}: {r:?}"))?;
    }
    let gs: Vec<(&String, &Diagram)> = c.diagrams.iter().filter(|(_, d)| is_gproj(d)).collect();
    let results = par::map(&gs, |(name, g)| {
        let run = || -> Result<(), String> {
            let sod = sod_decompose(&complete_resolution(g).map_err(e2s)?).map_err(e2s)?;
            let r = sod.verify(WIN.0, WIN.1).map_err(e2s)?;
            ensure(r.passed(), || format!("{r:?}"))?;
            ensure(is_contractible_on(&sod.xtc, WIN.0, WIN.1).map_err(e2s)?, || "x_tc is not contractible".into())
        };
        run().map_err(|e| format!("resolution of {name}: {e}"))
    });
    for r in results {
        r?;
    }
    Ok(format!("{} complex fixtures and {} resolutions on window {WIN:?}", c.complexes.len(), gs.len()))
}

fn c12_negatives() -> Check {
    let c = corpus();
    ensure(!is_self_injective(&upper_triangular(2)), || "triangular algebra passes the gate".into())?;
    let tri = Algebra::from_file(&read::<AlgebraFile>(&c.root.join("algebras/triangular.json"))).map_err(e2s)?;
    ensure(!is_self_injective(&tri), || "triangular fixture passes the gate".into())?;
    ensure(is_self_injective(&c.alg), || "dual numbers fail the gate".into())?;
    let mut stalks = 0;
    for name in ["stalk0_arrow", "stalk_apex_span"] {
        ensure(!is_gproj(&c.diagrams[name]), || format!("{name} classified GProj"))?;
        stalks += 1;
    }
    let reps = iso_reps(&c.alg);
    for shape in c.shapes.values() {
        for j in 0..shape.n_objects() {
            let minimal = shape.degree(j) == 0 && shape.non_identity().any(|f| shape.src(f) == j);
            if minimal {
                for m in reps.iter().filter(|m| !m.is_zero()) {
                    ensure(!is_gproj(&Diagram::stalk(shape, j, m)), || format!("stalk at {} over {} is GProj", shape.objects()[j], shape.name()))?;
                    stalks += 1;
                }
            }
        }
    }
    let (k, lam) = (&c.diagrams["k_e"], &c.diagrams["lambda_e"]);
    let v = is_stable_iso_diagrams(k, lam, SearchBudget::default()).map_err(e2s)?;
    ensure(v.is_false(), || format!("(k, Λ) diagram verdict {}", v.label()))?;
    let v = is_stable_iso(k.obj(0), lam.obj(0), SearchBudget::default());
    ensure(v.is_false(), || format!("(k, Λ) module verdict {}", v.label()))?;
    Ok(format!("gate rejects the triangular algebra, {stalks} minimal stalks non-GProj, (k, Λ) certified distinct"))
}

// ---------------------------------------------------------------- driver

fn main() {
    let criteria: Vec<(&str, Option<Duration>, fn() -> Check)> = vec![
        ("Gorenstein recognition oracle", Some(5 * MINUTE), c1_recognition),
        ("colimit agreement and exactness", Some(5 * MINUTE), c2_colimits),
        ("partial adjunction", None, c3_adjunction),
        ("cotorsion completeness", None, c4_cotorsion),
        ("stable equivalence round trip", None, c5_roundtrip),
        ("bar resolution", Some(2 * MINUTE), c6_bar),
        ("weighted holim sanity", None, c7_weights),
        ("Der4", None, c8_der4),
        ("cross-model Kan agreement", None, c9_crosscheck),
        ("stability", None, c10_stability),
        ("semiorthogonal decomposition", None, c11_sod),
        ("gates and negatives", None, c12_negatives),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, (name, limit, run)) in criteria.into_iter().enumerate() {
        let n = n + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if took > l => Err(format!("took {took:.1?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(msg) => println!("PASS {n:>2} {name}: {msg} [{:.1}s]", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {msg} [{:.1}s]", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
