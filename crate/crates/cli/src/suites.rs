//! Expansion of suites into independent items and their execution.

use derlab_core::category::{shapes, CatFunctor};
use derlab_core::complex::{complete_resolution, is_contractible_on, sod_decompose, LazyComplex};
use derlab_core::dgkan::{crosscheck_kan, der4_check, KanDirection};
use derlab_core::diagram::{ext1_dim, hom_dim_diagrams, is_projective_diagram, projective_cover_diagram, Diagram, DiagramMap};
use derlab_core::gorenstein::{
    approx_gproj, ginj_failure, ginj_right_kan, gproj_failure, gproj_left_kan, hull_ginj, is_ginj, is_gproj, is_wtriv,
    stable_roundtrip,
};
use derlab_core::homotopy::{is_stable_iso_diagrams, is_weak_equivalence, lift_to_arrow_diagram};
use derlab_core::modules::Verdict;
use derlab_core::{Error, Result};
use serde_json::{json, Value};

use crate::report::Status;
use crate::scenario::{ClassItem, Der4Item, KanItem, PairItem, Scenario, Suite};

pub struct Outcome {
    pub status: Status,
    pub detail: Value,
}

impl Outcome {
    fn check(ok: bool, detail: Value) -> Outcome {
        Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail }
    }

    pub fn from_error(e: &Error) -> Outcome {
        let status = match e {
            Error::Precondition(_) | Error::Input(_) | Error::Json(_) | Error::Io(_) => Status::Invalid,
            _ => Status::Fail,
        };
        Outcome { status, detail: json!({ "error": e.to_string() }) }
    }
}

type Job<'a> = Box<dyn Fn() -> Result<Outcome> + Send + Sync + 'a>;

pub struct Task<'a> {
    pub suite: &'static str,
    pub label: String,
    pub job: Job<'a>,
}

fn task<'a>(suite: &'static str, label: String, job: impl Fn() -> Result<Outcome> + Send + Sync + 'a) -> Task<'a> {
    Task { suite, label, job: Box::new(job) }
}

/// Verdict as JSON; `expect` flips which answer counts as a pass.
fn verdict<W>(v: &Verdict<W>, expect: bool) -> (Status, Value) {
    let status = match v {
        Verdict::Unknown { .. } => Status::Unknown,
        _ if v.is_true() == expect => Status::Pass,
        _ => Status::Fail,
    };
    let detail = match v {
        Verdict::True(_) => json!({ "verdict": "true" }),
        Verdict::False(c) => json!({ "verdict": "false", "certificate": c.describe() }),
        Verdict::Unknown { budget, seed, tried } => {
            json!({ "verdict": "unknown", "budget": budget, "seed": seed, "tried": tried })
        }
    };
    (status, detail)
}

fn functor_kind(u: &CatFunctor) -> &'static str {
    if u.target.n_objects() == 1 {
        return "projection";
    }
    match (u.is_sieve(), u.is_cosieve()) {
        (Ok(true), Ok(true)) => "sieve and cosieve",
        (Ok(true), _) => "sieve",
        (_, Ok(true)) => "cosieve",
        (Ok(false), Ok(false)) => "full embedding",
        _ => "other",
    }
}

pub fn expand<'a>(s: &'a Scenario, suite: &'a Suite) -> Vec<Task<'a>> {
    let name = suite.name();
    let (lo, hi) = s.window;
    match suite {
        Suite::Validate => validate(s),
        Suite::GorensteinReport { items } => {
            let all: Vec<ClassItem>;
            let items = if items.is_empty() {
                all = s.diagrams.keys().map(|d| ClassItem { diagram: d.clone(), gproj: None, ginj: None, wtriv: None }).collect();
                &all
            } else {
                items
            };
            items.iter().map(|i| classify(s, i.clone())).collect()
        }
        Suite::Kan { items } => items.iter().map(|k| kan(s, k)).collect(),
        Suite::Approx { diagrams } => diagrams
            .iter()
            .map(|d| {
                task(name, d.clone(), move || {
                    let z = s.diagram(d).map_err(Error::from)?;
                    let a = approx_gproj(z)?;
                    a.verify()?;
                    let h = hull_ginj(z)?;
                    h.verify()?;
                    let e = ext1_dim(a.conflation.middle(), a.conflation.first())?;
                    let dims = |c: &derlab_core::diagram::DiagramConflation| {
                        json!([c.first().dims(), c.middle().dims(), c.last().dims()])
                    };
                    Ok(Outcome::check(
                        e == 0,
                        json!({ "approx_gproj": dims(&a.conflation), "hull_ginj": dims(&h.conflation), "ext1_gproj_wtriv": e }),
                    ))
                })
            })
            .collect(),
        Suite::StableEquiv { roundtrip, pairs } => {
            let mut out: Vec<Task> = roundtrip
                .iter()
                .map(|d| {
                    task(name, format!("roundtrip {d}"), move || {
                        let g = s.diagram(d).map_err(Error::from)?;
                        let theta = stable_roundtrip(g)?;
                        let (status, mut detail) = verdict(&is_weak_equivalence(&theta)?, true);
                        detail["dims"] = json!([theta.source.dims(), theta.target.dims()]);
                        Ok(Outcome { status, detail })
                    })
                })
                .collect();
            out.extend(pairs.iter().map(|p| stable_pair(s, p)));
            out
        }
        Suite::Sod { complexes, resolutions } => {
            let mut out: Vec<Task> = complexes
                .iter()
                .map(|c| task(name, format!("complex {c}"), move || sod_item(s.complex(c).map_err(Error::from)?, lo, hi, false)))
                .collect();
            out.extend(resolutions.iter().map(|d| {
                task(name, format!("resolution {d}"), move || {
                    sod_item(&complete_resolution(s.diagram(d).map_err(Error::from)?)?, lo, hi, true)
                })
            }));
            out
        }
        Suite::Crosscheck { items } => items.iter().map(|k| crosscheck(s, k)).collect(),
        Suite::DerivatorAxioms { der1, der2, der3, der4, der5 } => {
            let mut out: Vec<Task> = der1.iter().map(|p| der1_item(s, p)).collect();
            out.extend(der2.iter().map(|d| der2_item(s, d)));
            out.extend(der3.iter().map(|k| der3_item(s, k)));
            out.extend(der4.iter().map(|d| der4_item(s, d)));
            out.extend(der5.iter().map(|d| der5_item(s, d)));
            out
        }
    }
}

fn validate(s: &Scenario) -> Vec<Task<'_>> {
    let mut out = vec![task("validate", "algebra".into(), move || {
        Ok(Outcome::check(true, json!({ "p": s.alg.p(), "dim": s.alg.dim(), "self_injective": true })))
    })];
    for (n, c) in &s.categories {
        out.push(task("validate", format!("category {n}"), move || {
            Ok(Outcome::check(
                true,
                json!({ "objects": c.n_objects(), "morphisms": c.n_morphisms(), "longest_chain": c.longest_chain() }),
            ))
        }));
    }
    for (n, u) in &s.functors {
        out.push(task("validate", format!("functor {n}"), move || {
            Ok(Outcome::check(true, json!({ "source": u.source.name(), "target": u.target.name(), "kind": functor_kind(u) })))
        }));
    }
    for (n, d) in &s.diagrams {
        out.push(task("validate", format!("diagram {n}"), move || {
            Ok(Outcome::check(true, json!({ "shape": d.shape().name(), "dims": d.dims() })))
        }));
    }
    for (n, c) in &s.complexes {
        let (lo, hi) = s.window;
        out.push(task("validate", format!("complex {n}"), move || {
            c.check_window(lo, hi)?;
            let dims: Vec<Vec<usize>> = (lo..=hi).map(|k| c.term(k).map(|t| t.dims())).collect::<Result<_>>()?;
            Ok(Outcome::check(true, json!({ "window": [lo, hi], "dims": dims })))
        }));
    }
    out
}

fn classify(s: &Scenario, item: ClassItem) -> Task<'_> {
    task("gorenstein-report", item.diagram.clone(), move || {
        let x = s.diagram(&item.diagram).map_err(Error::from)?;
        let names = x.shape().objects();
        let (gp, gi, wt) = (is_gproj(x), is_ginj(x), is_wtriv(x));
        let ok = [(item.gproj, gp), (item.ginj, gi), (item.wtriv, wt)].iter().all(|(e, v)| e.is_none_or(|e| e == *v));
        Ok(Outcome::check(
            ok,
            json!({
                "dims": x.dims(),
                "gproj": gp,
                "ginj": gi,
                "wtriv": wt,
                "latching_failure": gproj_failure(x).map(|j| names[j].clone()),
                "matching_failure": ginj_failure(x).map(|j| names[j].clone()),
            }),
        ))
    })
}

fn kan<'a>(s: &'a Scenario, k: &'a KanItem) -> Task<'a> {
    let label = format!("{:?} {} {}", k.direction, k.functor, k.diagram).to_lowercase();
    task("kan", label, move || {
        let u = s.functor(&k.functor).map_err(Error::from)?;
        let x = s.diagram(&k.diagram).map_err(Error::from)?;
        let (g, class_ok) = match k.direction {
            KanDirection::Left => {
                let g = gproj_left_kan(u, x)?;
                let ok = is_gproj(&g.diagram);
                (g, ok)
            }
            KanDirection::Right => {
                let g = ginj_right_kan(u, x)?;
                let ok = is_ginj(&g.diagram);
                (g, ok)
            }
        };
        let mut homs = Vec::new();
        for name in &k.against {
            let y = s.diagram(name).map_err(Error::from)?;
            let ry = y.restrict(u);
            let pair = match k.direction {
                KanDirection::Left => (hom_dim_diagrams(&g.diagram, y)?, hom_dim_diagrams(x, &ry)?),
                KanDirection::Right => (hom_dim_diagrams(y, &g.diagram)?, hom_dim_diagrams(&ry, x)?),
            };
            homs.push(json!({ "against": name, "extended": pair.0, "restricted": pair.1 }));
        }
        let homs_ok = homs.iter().all(|h| h["extended"] == h["restricted"]);
        let natural = g.adjunction_map.is_natural();
        Ok(Outcome::check(
            class_ok && homs_ok && natural,
            json!({ "dims": g.diagram.dims(), "class_ok": class_ok, "unit_natural": natural, "hom_dims": homs }),
        ))
    })
}

fn stable_pair<'a>(s: &'a Scenario, p: &'a PairItem) -> Task<'a> {
    task("stable-equiv", format!("{} ~ {}", p.left, p.right), move || {
        let (x, y) = (s.diagram(&p.left).map_err(Error::from)?, s.diagram(&p.right).map_err(Error::from)?);
        let (status, mut detail) = verdict(&is_stable_iso_diagrams(x, y, s.budget)?, p.expect.unwrap_or(true));
        detail["dims"] = json!([x.dims(), y.dims()]);
        detail["seed"] = json!(s.budget.seed);
        Ok(Outcome { status, detail })
    })
}

fn sod_item(c: &LazyComplex, lo: i64, hi: i64, resolution: bool) -> Result<Outcome> {
    let sod = sod_decompose(c)?;
    let r = sod.verify(lo, hi)?;
    // for a complete resolution the contractible part must vanish up to homotopy
    let contractible = if resolution { Some(is_contractible_on(&sod.xtc, lo, hi)?) } else { None };
    let xp0 = sod.xp.term(0)?.dims();
    let ok = r.passed() && contractible != Some(false);
    Ok(Outcome::check(ok, json!({ "report": r, "xtc_contractible": contractible, "xp_dims_at_0": xp0 })))
}

fn crosscheck<'a>(s: &'a Scenario, k: &'a KanItem) -> Task<'a> {
    let label = format!("{:?} {} {}", k.direction, k.functor, k.diagram).to_lowercase();
    task("crosscheck", label, move || {
        let u = s.functor(&k.functor).map_err(Error::from)?;
        let x = s.diagram(&k.diagram).map_err(Error::from)?;
        let c = crosscheck_kan(u, x, k.direction, s.budget)?;
        let (status, mut detail) = verdict(&c.verdict, true);
        detail["functor_kind"] = json!(functor_kind(u));
        detail["window"] = json!([c.window.0, c.window.1]);
        detail["bar_length"] = json!(c.bar_length);
        detail["sod"] = json!(c.sod);
        detail["pipeline_dims"] = json!(c.pipeline_dims);
        detail["direct_dims"] = json!(c.direct_dims);
        detail["reduced_dims"] = json!([c.reduced_dims.0, c.reduced_dims.1]);
        detail["seed"] = json!(s.budget.seed);
        Ok(Outcome { status, detail })
    })
}

/// Der1: a diagram on a disjoint union is the pair of its restrictions.
fn der1_item<'a>(s: &'a Scenario, p: &'a PairItem) -> Task<'a> {
    task("derivator-axioms", format!("der1 {} + {}", p.left, p.right), move || {
        let (a, b) = (s.diagram(&p.left).map_err(Error::from)?, s.diagram(&p.right).map_err(Error::from)?);
        let (cat, ia, ib) = shapes::disjoint_union(a.shape(), b.shape());
        let pick = |o: usize| match ia.preimage(o) {
            Some(i) => a.obj(i).clone(),
            None => b.obj(ib.preimage(o).expect("disjoint union")).clone(),
        };
        let objects = (0..cat.n_objects()).map(pick).collect();
        let maps = (0..cat.n_morphisms())
            .map(|m| match ia.mor.iter().position(|&f| f == m) {
                Some(f) => a.matrix(f).clone(),
                None => b.matrix(ib.mor.iter().position(|&f| f == m).expect("disjoint union")).clone(),
            })
            .collect();
        let z = Diagram::checked(&cat, &s.alg, objects, maps)?;
        let restricts = z.restrict(&ia) == *a && z.restrict(&ib) == *b;
        let (hz, ha, hb) = (hom_dim_diagrams(&z, &z)?, hom_dim_diagrams(a, a)?, hom_dim_diagrams(b, b)?);
        let classes = is_gproj(&z) == (is_gproj(a) && is_gproj(b));
        Ok(Outcome::check(
            restricts && hz == ha + hb && classes,
            json!({ "restricts": restricts, "end_dims": [hz, ha, hb], "gproj_agrees": classes }),
        ))
    })
}

/// Der2: weak equivalences are detected objectwise.
fn der2_item<'a>(s: &'a Scenario, d: &'a String) -> Task<'a> {
    task("derivator-axioms", format!("der2 {d}"), move || {
        let x = s.diagram(d).map_err(Error::from)?;
        let cov = projective_cover_diagram(x);
        let sum = Diagram::direct_sum(x.shape(), x.alg(), &[x.clone(), cov.middle().clone()]);
        let into_sum = is_weak_equivalence(&sum.injections[0])?;
        let zero = is_weak_equivalence(&DiagramMap::zero(x, x))?;
        let projective = is_projective_diagram(x);
        let ok = into_sum.is_true() && zero.is_true() == projective;
        Ok(Outcome::check(
            ok,
            json!({ "inclusion_into_sum": into_sum.label(), "zero_map": zero.label(), "projective": projective }),
        ))
    })
}

/// Der3: the Kan extensions exist on the fixtures.
fn der3_item<'a>(s: &'a Scenario, k: &'a KanItem) -> Task<'a> {
    let label = format!("der3 {:?} {} {}", k.direction, k.functor, k.diagram).to_lowercase();
    task("derivator-axioms", label, move || {
        let u = s.functor(&k.functor).map_err(Error::from)?;
        let x = s.diagram(&k.diagram).map_err(Error::from)?;
        let (g, ok) = match k.direction {
            KanDirection::Left => {
                let g = gproj_left_kan(u, x)?;
                let ok = is_gproj(&g.diagram);
                (g, ok)
            }
            KanDirection::Right => {
                let g = ginj_right_kan(u, x)?;
                let ok = is_ginj(&g.diagram);
                (g, ok)
            }
        };
        Ok(Outcome::check(ok && g.adjunction_map.is_natural(), json!({ "dims": g.diagram.dims(), "class_ok": ok })))
    })
}

fn der4_item<'a>(s: &'a Scenario, d: &'a Der4Item) -> Task<'a> {
    task("derivator-axioms", format!("der4 {} at {} on {}", d.functor, d.object, d.input), move || {
        let u = s.functor(&d.functor).map_err(Error::from)?;
        let j = u.target.object_index(&d.object)?;
        let t = match s.complexes.get(&d.input) {
            Some(c) => c.clone(),
            None => complete_resolution(s.diagram(&d.input).map_err(Error::from)?)?,
        };
        let r = der4_check(u, j, &t, s.window.0, s.window.1)?;
        Ok(Outcome::check(r.passed(), json!(r)))
    })
}

/// Der5: morphisms lift to arrow diagrams up to projective padding.
fn der5_item<'a>(s: &'a Scenario, d: &'a String) -> Task<'a> {
    task("derivator-axioms", format!("der5 {d}"), move || {
        let x = s.diagram(d).map_err(Error::from)?;
        let mut checks = Vec::new();
        for (name, f) in [("identity", DiagramMap::identity(x)), ("zero", DiagramMap::zero(x, x))] {
            let l = lift_to_arrow_diagram(&f, 2)?;
            let ok = is_gproj(&l.diagram)
                && l.diagram.restrict(&l.ends[0]) == *x
                && l.diagram.restrict(&l.ends[1]) == l.edge.target
                && l.projection.after(&l.edge).comps == f.comps;
            checks.push((name, ok, l.padding));
        }
        let ok = checks.iter().all(|c| c.1);
        let detail: Vec<Value> = checks.iter().map(|(n, ok, pad)| json!({ "map": n, "ok": ok, "padding": pad })).collect();
        Ok(Outcome::check(ok, json!(detail)))
    })
}
