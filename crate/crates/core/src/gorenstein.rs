//! Gorenstein projective and injective diagrams over a direct category.
//!
//! Over a self-injective Λ, a diagram is Gorenstein projective iff all its
//! latching maps are injective, and Gorenstein injective iff all matching maps
//! are surjective. The GInj side is obtained from the GProj side by linear
//! duality over I^op and Λ^op.

use crate::category::{punctured_over, punctured_under, shapes, slice, Cat, CatFunctor, SliceSide};
use crate::diagram::{
    colimit, colimit_along, cokernel_diagram, is_projective_diagram, limit_along, projective_cover_diagram, pushout_diagrams,
    solve_diagram_map, sub_diagram, Colimit, Diagram, DiagramConflation, DiagramMap, Limit,
};
use crate::error::{Error, Result};
use crate::field::Matrix;
use crate::modules::{cokernel, injective_embed, is_projective, module_retraction, pushout, solve_module_map, Module, ModuleMap};
use serde::Serialize;
use std::sync::Arc;

/// L_j(x) = colim over ∂(I/j) with λ_j: L_j(x) → x_j.
#[derive(Clone, Debug)]
pub struct LatchingDatum {
    pub object: usize,
    pub module: Module,
    pub map: ModuleMap,
    pub colimit: Colimit,
    pub pairs: Vec<(usize, usize)>,
}

/// M_j(y) = lim over ∂(j/I) with μ_j: y_j → M_j(y).
#[derive(Clone, Debug)]
pub struct MatchingDatum {
    pub object: usize,
    pub module: Module,
    pub map: ModuleMap,
    pub limit: Limit,
    pub pairs: Vec<(usize, usize)>,
}

pub fn latching(x: &Diagram, j: usize) -> LatchingDatum {
    let s = punctured_under(x.shape(), j);
    let col = colimit_along(&s.projection, x);
    let cocone: Vec<Matrix> = s.pairs.iter().map(|&(_, f)| x.matrix(f).clone()).collect();
    let m = col.descend(&cocone, x.obj(j).dim());
    let map = ModuleMap { source: col.module.clone(), target: x.obj(j).clone(), matrix: m };
    LatchingDatum { object: j, module: col.module.clone(), map, colimit: col, pairs: s.pairs }
}

pub fn matching(y: &Diagram, j: usize) -> MatchingDatum {
    let s = punctured_over(y.shape(), j);
    let lim = limit_along(&s.projection, y);
    let cone: Vec<Matrix> = s.pairs.iter().map(|&(_, f)| y.matrix(f).clone()).collect();
    let m = lim.lift(&cone, y.obj(j).dim());
    let map = ModuleMap { source: y.obj(j).clone(), target: lim.module.clone(), matrix: m };
    MatchingDatum { object: j, module: lim.module.clone(), map, limit: lim, pairs: s.pairs }
}

/// First object whose latching map is not injective.
pub fn gproj_failure(x: &Diagram) -> Option<usize> {
    (0..x.shape().n_objects()).find(|&j| !latching(x, j).map.is_injective())
}

/// First object whose matching map is not surjective.
pub fn ginj_failure(y: &Diagram) -> Option<usize> {
    (0..y.shape().n_objects()).find(|&j| !matching(y, j).map.is_surjective())
}

pub fn is_gproj(x: &Diagram) -> bool {
    gproj_failure(x).is_none()
}

pub fn is_ginj(y: &Diagram) -> bool {
    ginj_failure(y).is_none()
}

/// Weakly trivial: every component projective.
pub fn is_wtriv(x: &Diagram) -> bool {
    x.objects().iter().all(is_projective)
}

/// `0 → L → j_!(p) → stalk_j(p) → 0`, L spanned by the non-identity slots.
pub fn stalk_presentation(shape: &Cat, j: usize, m: &Module) -> DiagramConflation {
    let free = Diagram::free_at(shape, j, m);
    let p = m.p();
    let d = m.dim();
    let bases: Vec<Matrix> = (0..shape.n_objects())
        .map(|i| {
            let hom = shape.hom(j, i);
            let cols: Vec<Vec<u32>> = hom
                .iter()
                .enumerate()
                .filter(|(_, &f)| !shape.is_identity(f))
                .flat_map(|(a, _)| {
                    (0..d).map(move |r| {
                        let mut v = vec![0u32; hom.len() * d];
                        v[a * d + r] = 1;
                        v
                    })
                })
                .collect();
            Matrix::from_cols(p, hom.len() * d, &cols)
        })
        .collect();
    let left = sub_diagram(&free, &bases).expect("non-identity slots are invariant");
    let stalk = Diagram::stalk(shape, j, m);
    let comps = (0..shape.n_objects())
        .map(|i| if i == j { Matrix::identity(p, d) } else { Matrix::zeros(p, 0, free.obj(i).dim()) })
        .collect();
    let right = DiagramMap::new_unchecked(&free, &stalk, comps);
    DiagramConflation { left, right }
}

/// `0 → stalk_j(m) → j_*(m) → C → 0`.
pub fn stalk_copresentation(shape: &Cat, j: usize, m: &Module) -> DiagramConflation {
    let cofree = Diagram::cofree_at(shape, j, m);
    let stalk = Diagram::stalk(shape, j, m);
    let p = m.p();
    let comps = (0..shape.n_objects())
        .map(|i| if i == j { Matrix::identity(p, m.dim()) } else { Matrix::zeros(p, cofree.obj(i).dim(), 0) })
        .collect();
    let left = DiagramMap::new_unchecked(&stalk, &cofree, comps);
    let (right, _) = cokernel_diagram(&left);
    DiagramConflation { left, right }
}

/// Λ-linear retractions of every component of the left map, if they exist.
pub fn degreewise_splitting(c: &DiagramConflation) -> Option<Vec<ModuleMap>> {
    (0..c.middle().shape().n_objects()).map(|i| module_retraction(&c.left.component(i))).collect()
}

/// A colimit with legs from every object, as produced by the pushout induction.
#[derive(Clone, Debug)]
pub struct GColimit {
    pub module: Module,
    pub legs: Vec<Matrix>,
}

impl GColimit {
    /// The map induced by a compatible cocone, found by solving `M·legs = cocone`.
    pub fn descend(&self, cocone: &[Matrix], target_dim: usize) -> Option<Matrix> {
        let p = self.module.p();
        let a = Matrix::hstack(p, self.module.dim(), &self.legs.iter().collect::<Vec<_>>());
        let b = Matrix::hstack(p, target_dim, &cocone.iter().collect::<Vec<_>>());
        solve_right(&a, &b)
    }
}

/// X with X·a = b.
pub(crate) fn solve_right(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    if a.rows() == 0 {
        return b.is_zero().then(|| Matrix::zeros(a.p(), b.rows(), 0));
    }
    a.transpose().solve(&b.transpose()).map(|x| x.transpose())
}

/// Colimit of a GProj diagram by stripping a maximal object j and pushing
/// out λ_j against the induced map L_j → colim of the rest. The result is
/// checked against the plain colimit.
pub fn colim_gproj(x: &Diagram) -> Result<GColimit> {
    let g = colim_gproj_rec(x)?;
    let plain = colimit(x);
    let cmp = plain.descend(&g.legs, g.module.dim());
    if cmp.inverse().is_none() {
        return Err(Error::Construction("inductive colimit differs from the pointwise colimit".into()));
    }
    Ok(g)
}

fn colim_gproj_rec(x: &Diagram) -> Result<GColimit> {
    let shape = x.shape();
    let alg = x.alg();
    let n = shape.n_objects();
    if n == 0 {
        return Ok(GColimit { module: Module::zero(alg), legs: vec![] });
    }
    let j = *shape.objects_by_degree().last().unwrap();
    let lat = latching(x, j);
    if !lat.map.is_injective() {
        return Err(Error::Precondition(format!("latching map at {} is not injective", shape.objects()[j])));
    }
    let rest: Vec<usize> = (0..n).filter(|&i| i != j).collect();
    let (_, inc) = shapes::full_subcategory(shape, &rest);
    let inner = colim_gproj_rec(&x.restrict(&inc))?;
    let pos = |i: usize| rest.iter().position(|&r| r == i).unwrap();
    let cocone: Vec<Matrix> = lat.pairs.iter().map(|&(i, _)| inner.legs[pos(i)].clone()).collect();
    let r = lat.colimit.descend(&cocone, inner.module.dim());
    let r = ModuleMap { source: lat.module.clone(), target: inner.module.clone(), matrix: r };
    let (c, from_xj, from_inner) = pushout(&lat.map, &r);
    let legs = (0..n)
        .map(|i| if i == j { from_xj.matrix.clone() } else { from_inner.matrix.mul(&inner.legs[pos(i)]) })
        .collect();
    Ok(GColimit { module: c, legs })
}

/// A Kan extension together with its unit (left) or counit (right).
#[derive(Clone, Debug)]
pub struct GKan {
    pub diagram: Diagram,
    /// Left: x → u^* u_! x. Right: u^* u_* y → y.
    pub adjunction_map: DiagramMap,
}

/// u_! on GProj diagrams via colim_gproj over the slices u/j.
pub fn gproj_left_kan(u: &CatFunctor, x: &Diagram) -> Result<GKan> {
    if let Some(j) = gproj_failure(x) {
        return Err(Error::Precondition(format!("input is not GProj (latching at {})", x.shape().objects()[j])));
    }
    let (ci, cj) = (&u.source, &u.target);
    let alg = x.alg();
    let p = alg.p();
    let slices: Vec<(Vec<(usize, usize)>, GColimit)> = crate::par::map_range(cj.n_objects(), |j| {
        let s = slice(u, j, SliceSide::Under, false);
        colim_gproj(&x.restrict(&s.projection)).map(|c| (s.pairs, c))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let objects: Vec<Module> = slices.iter().map(|(_, c)| c.module.clone()).collect();
    let maps = (0..cj.n_morphisms())
        .map(|g| {
            let (j, j2) = (cj.src(g), cj.tgt(g));
            if cj.is_identity(g) {
                return Ok(Matrix::identity(p, objects[j].dim()));
            }
            let (pairs, col) = &slices[j];
            let (pairs2, col2) = &slices[j2];
            let cocone: Vec<Matrix> = pairs
                .iter()
                .map(|&(i, f)| {
                    let b = pairs2.iter().position(|&pr| pr == (i, cj.comp(g, f))).expect("slice functor");
                    col2.legs[b].clone()
                })
                .collect();
            col.descend(&cocone, objects[j2].dim()).ok_or_else(|| Error::Construction("cocone does not descend".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let diagram = Diagram::checked(cj, alg, objects, maps)?;
    let unit = (0..ci.n_objects())
        .map(|i| {
            let j = u.obj[i];
            let (pairs, col) = &slices[j];
            let a = pairs.iter().position(|&pr| pr == (i, cj.identity(j))).unwrap();
            col.legs[a].clone()
        })
        .collect();
    let unit = DiagramMap::new(x, &diagram.restrict(u), unit)?;
    if let Some(j) = gproj_failure(&diagram) {
        return Err(Error::Construction(format!("left Kan extension is not GProj at {}", cj.objects()[j])));
    }
    Ok(GKan { diagram, adjunction_map: unit })
}

/// u_* on GInj diagrams, dual to gproj_left_kan over the opposite shapes.
pub fn ginj_right_kan(u: &CatFunctor, y: &Diagram) -> Result<GKan> {
    if let Some(j) = ginj_failure(y) {
        return Err(Error::Precondition(format!("input is not GInj (matching at {})", y.shape().objects()[j])));
    }
    let uop = u.opposite();
    let k = gproj_left_kan(&uop, &y.dual().on_shape(&uop.source))?;
    let diagram = k.diagram.dual_onto(&u.target, y.alg());
    let counit = k.adjunction_map.dual_between(&diagram.restrict(u), y);
    Ok(GKan { diagram, adjunction_map: counit })
}

/// `0 → g → Q → g' → 0` with Q = ⊕_j j_!(Q_j) projective and g' GProj.
///
/// Q_j is the injective envelope of coker λ_j(g). Objects are handled in
/// increasing degree: the non-identity slots of φ_i extend the map already
/// prescribed on L_i(g) along λ_i (possible since those slots are injective
/// modules), and the (i, id) slot is g_i ↠ coker λ_i ↪ Q_i.
pub fn embed_gproj_into_proj(g: &Diagram) -> Result<DiagramConflation> {
    if let Some(j) = gproj_failure(g) {
        return Err(Error::Precondition(format!("input is not GProj (latching at {})", g.shape().objects()[j])));
    }
    let shape = g.shape();
    let alg = g.alg();
    let p = alg.p();
    let n = shape.n_objects();
    if is_projective_diagram(g) {
        let zero = Diagram::zero(shape, alg);
        return Ok(DiagramConflation { left: DiagramMap::identity(g), right: DiagramMap::zero(g, &zero) });
    }
    // fresh component per object
    let fresh: Vec<(Module, Matrix)> = (0..n)
        .map(|j| {
            let lat = latching(g, j);
            let q = cokernel(&lat.map);
            let env = injective_embed(&q.map.target);
            (env.middle().clone(), env.left.matrix.mul(&q.map.matrix))
        })
        .collect();
    for (qj, _) in &fresh {
        if !is_projective(qj) {
            return Err(Error::Precondition("injective envelope is not projective: Λ is not self-injective".into()));
        }
    }
    let frees: Vec<Diagram> = fresh.iter().enumerate().map(|(j, (qj, _))| Diagram::free_at(shape, j, qj)).collect();
    let q = Diagram::direct_sum(shape, alg, &frees).diagram;
    // slot layout at object i: (jj, f) for f ∈ hom(jj, i), in order
    let slots = |i: usize| -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut off = 0;
        for (jj, (qj, _)) in fresh.iter().enumerate() {
            for &f in shape.hom(jj, i) {
                out.push((f, off, qj.dim()));
                off += qj.dim();
            }
        }
        out
    };
    let mut comps: Vec<Option<Matrix>> = vec![None; n];
    for i in shape.objects_by_degree() {
        let sl = slots(i);
        let id = shape.identity(i);
        let rows_n: Vec<usize> =
            sl.iter().filter(|s| s.0 != id).flat_map(|&(_, off, d)| off..off + d).collect();
        let (_, fresh_off, fresh_d) = *sl.iter().find(|s| s.0 == id).unwrap();
        let parts: Vec<Module> = sl.iter().filter(|s| s.0 != id).map(|&(f, _, _)| fresh[shape.src(f)].0.clone()).collect();
        let nmod = Module::direct_sum_of(alg, &parts);
        let constraints: Vec<(Matrix, Matrix)> = shape
            .irreducible()
            .iter()
            .filter(|&&f| shape.tgt(f) == i)
            .map(|&f| {
                let k = shape.src(f);
                let t = q.matrix(f).mul(comps[k].as_ref().expect("lower degree first"));
                (g.matrix(f).clone(), t.select_rows(&rows_n))
            })
            .collect();
        let alpha = solve_module_map(g.obj(i), &nmod, &constraints, &[]).ok_or_else(|| {
            Error::Construction(format!("no extension along the latching map at {}", shape.objects()[i]))
        })?;
        let mut phi = Matrix::zeros(p, q.obj(i).dim(), g.obj(i).dim());
        for (r, &row) in rows_n.iter().enumerate() {
            for c in 0..g.obj(i).dim() {
                phi.set(row, c, alpha.get(r, c));
            }
        }
        debug_assert_eq!(fresh[i].1.rows(), fresh_d);
        phi.set_block(fresh_off, 0, &fresh[i].1);
        comps[i] = Some(phi);
    }
    let phi = DiagramMap::new(g, &q, comps.into_iter().map(Option::unwrap).collect())?;
    if !phi.is_injective() {
        return Err(Error::Construction("embedding into a projective diagram is not injective".into()));
    }
    let (right, _) = cokernel_diagram(&phi);
    if let Some(j) = gproj_failure(&right.target) {
        return Err(Error::Construction(format!("cokernel of the embedding is not GProj at {}", shape.objects()[j])));
    }
    Ok(DiagramConflation { left: phi, right })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagramClass {
    GProj,
    GInj,
    WTriv,
}

impl DiagramClass {
    pub fn holds(self, x: &Diagram) -> bool {
        match self {
            DiagramClass::GProj => is_gproj(x),
            DiagramClass::GInj => is_ginj(x),
            DiagramClass::WTriv => is_wtriv(x),
        }
    }
}

/// A conflation with class tags on its terms (first, middle, last).
#[derive(Clone, Debug)]
pub struct ApproximationTriple {
    pub conflation: DiagramConflation,
    pub tags: [Option<DiagramClass>; 3],
}

impl ApproximationTriple {
    pub fn verify(&self) -> Result<()> {
        self.conflation.verify()?;
        let c = &self.conflation;
        for (pos, (tag, x)) in self.tags.iter().zip([c.first(), c.middle(), c.last()]).enumerate() {
            if let Some(t) = tag {
                if !t.holds(x) {
                    return Err(Error::Construction(format!("term {pos} of the approximation is not {t:?}")));
                }
            }
        }
        Ok(())
    }

    fn checked(self) -> Result<Self> {
        self.verify()?;
        Ok(self)
    }
}

/// Per-component solve of `r ∘ leg_k = cocone_k` for maps out of a quotient
/// of a direct sum (pushouts, cokernels).
fn descend_maps(source: &Diagram, target: &Diagram, legs: &[&DiagramMap], cocone: &[&DiagramMap]) -> Result<DiagramMap> {
    let p = source.p();
    let comps = (0..source.shape().n_objects())
        .map(|i| {
            let a = Matrix::hstack(p, source.obj(i).dim(), &legs.iter().map(|l| &l.comps[i]).collect::<Vec<_>>());
            let b = Matrix::hstack(p, target.obj(i).dim(), &cocone.iter().map(|l| &l.comps[i]).collect::<Vec<_>>());
            solve_right(&a, &b).ok_or_else(|| Error::Construction("cocone does not descend".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    DiagramMap::new(source, target, comps)
}

/// From `0 → W → G → z → 0`, the WTriv hull `0 → z → H → G' → 0`.
fn hull_from_approx(a: &DiagramConflation) -> Result<DiagramConflation> {
    let e = embed_gproj_into_proj(a.middle())?;
    let (h, q_to_h, z_to_h) = pushout_diagrams(&e.left, &a.right);
    let zero = DiagramMap::zero(a.last(), e.last());
    let right = descend_maps(&h, e.last(), &[&q_to_h, &z_to_h], &[&e.right, &zero])?;
    Ok(DiagramConflation { left: z_to_h, right })
}

/// `0 → W → G → z → 0` with W WTriv and G GProj.
///
/// Syzygies Z_0 = z, Z_1, … are taken until one is GProj. Walking back, the
/// WTriv hull of Z_{k+1} is pushed out against the cover P_k → Z_k.
pub fn approx_gproj(z: &Diagram) -> Result<ApproximationTriple> {
    let shape = z.shape();
    let alg = z.alg();
    let bound = shape.max_degree() + 1;
    let mut covers: Vec<DiagramConflation> = Vec::new();
    let mut last = z.clone();
    while !is_gproj(&last) {
        if covers.len() > bound {
            return Err(Error::Construction("syzygies did not become GProj within the degree bound".into()));
        }
        let c = projective_cover_diagram(&last);
        last = c.first().clone();
        covers.push(c);
    }
    let zero = Diagram::zero(shape, alg);
    let mut cur = DiagramConflation { left: DiagramMap::zero(&zero, &last), right: DiagramMap::identity(&last) };
    for c in covers.iter().rev() {
        let h = hull_from_approx(&cur)?;
        let (gk, p_to_g, h_to_g) = pushout_diagrams(&c.left, &h.left);
        let zero_map = DiagramMap::zero(h.middle(), c.last());
        let r = descend_maps(&gk, c.last(), &[&p_to_g, &h_to_g], &[&c.right, &zero_map])?;
        cur = DiagramConflation { left: h_to_g, right: r };
    }
    ApproximationTriple { conflation: cur, tags: [Some(DiagramClass::WTriv), Some(DiagramClass::GProj), None] }.checked()
}

/// `0 → z → H → G → 0` with H WTriv and G GProj.
pub fn hull_wtriv(z: &Diagram) -> Result<ApproximationTriple> {
    let a = approx_gproj(z)?;
    let h = hull_from_approx(&a.conflation)?;
    ApproximationTriple { conflation: h, tags: [None, Some(DiagramClass::WTriv), Some(DiagramClass::GProj)] }.checked()
}

/// Dualize a conflation over (I^op, Λ^op) back onto `shape` and `alg`,
/// reversing its direction.
fn undual(c: &DiagramConflation, shape: &Cat, alg: &Arc<crate::algebra::Algebra>) -> DiagramConflation {
    let (a, b, cc) = (c.first(), c.middle(), c.last());
    let (da, db, dc) = (a.dual_onto(shape, alg), b.dual_onto(shape, alg), cc.dual_onto(shape, alg));
    DiagramConflation { left: c.right.dual_between(&dc, &db), right: c.left.dual_between(&db, &da) }
}

/// `0 → z → Y → W → 0` with Y GInj and W WTriv.
pub fn hull_ginj(z: &Diagram) -> Result<ApproximationTriple> {
    let a = approx_gproj(&z.dual())?;
    let c = undual(&a.conflation, z.shape(), z.alg());
    ApproximationTriple { conflation: c, tags: [None, Some(DiagramClass::GInj), Some(DiagramClass::WTriv)] }.checked()
}

/// `0 → Y → W → z → 0` with Y GInj and W WTriv.
pub fn cover_wtriv(z: &Diagram) -> Result<ApproximationTriple> {
    let a = hull_wtriv(&z.dual())?;
    let c = undual(&a.conflation, z.shape(), z.alg());
    ApproximationTriple { conflation: c, tags: [Some(DiagramClass::GInj), Some(DiagramClass::WTriv), None] }.checked()
}

/// F(g) with its fixed hull `0 → g → F(g) → W → 0`.
#[derive(Clone, Debug)]
pub struct FImage {
    pub diagram: Diagram,
    pub hull: ApproximationTriple,
}

impl FImage {
    pub fn eta(&self) -> &DiagramMap {
        &self.hull.conflation.left
    }
}

/// The equivalence GProj → GInj on objects.
pub fn stable_equiv_f(g: &Diagram) -> Result<FImage> {
    if let Some(j) = gproj_failure(g) {
        return Err(Error::Precondition(format!("input is not GProj (latching at {})", g.shape().objects()[j])));
    }
    let hull = hull_ginj(g)?;
    Ok(FImage { diagram: hull.conflation.middle().clone(), hull })
}

/// F on a morphism φ: g → g2: any X with X∘η_g = η_{g2}∘φ.
pub fn stable_equiv_f_map(phi: &DiagramMap, fg: &FImage, fg2: &FImage) -> Result<DiagramMap> {
    let t = fg2.eta().after(phi);
    solve_diagram_map(&fg.diagram, &fg2.diagram, &[(fg.eta().clone(), t)], &[])?
        .ok_or_else(|| Error::Construction("extension square has no solution".into()))
}

/// The inverse on objects: F⁻¹(y) is the middle of the GProj approximation of y.
pub fn stable_equiv_f_inverse(y: &Diagram) -> Result<ApproximationTriple> {
    if let Some(j) = ginj_failure(y) {
        return Err(Error::Precondition(format!("input is not GInj (matching at {})", y.shape().objects()[j])));
    }
    approx_gproj(y)
}

/// The comparison θ: g → F⁻¹(F(g)) lifting η through ε; it is a degreewise
/// stable isomorphism when the construction is correct.
pub fn stable_roundtrip(g: &Diagram) -> Result<DiagramMap> {
    let fg = stable_equiv_f(g)?;
    let back = stable_equiv_f_inverse(&fg.diagram)?;
    let eps = &back.conflation.right;
    solve_diagram_map(g, back.conflation.middle(), &[], &[(eps.clone(), fg.eta().clone())])?
        .ok_or_else(|| Error::Construction("η does not lift through the approximation".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::standard::dual_numbers;
    use crate::category::shapes::{arrow, point, span, square};
    use crate::diagram::{ext1_dim, hom_dim_diagrams};
    use crate::modules::{is_stable_iso_map, Module};

    fn k(alg: &Arc<crate::algebra::Algebra>) -> Module {
        Module::trivial(alg, 1).unwrap()
    }

    /// (k ↪ Λ) over [1] via the socle.
    fn socle_arrow() -> Diagram {
        let alg = dual_numbers(2);
        let lam = Module::regular(&alg);
        let soc = Matrix::from_rows(2, 2, 1, &[vec![0], vec![1]]).unwrap();
        Diagram::new(&arrow(), &alg, vec![k(&alg), lam], vec![soc]).unwrap()
    }

    #[test]
    fn latching_over_arrow_and_square() {
        let x = socle_arrow();
        let l1 = latching(&x, 1);
        assert_eq!(l1.module.dim(), 1);
        assert_eq!(l1.map.matrix, *x.matrix(2));
        assert_eq!(latching(&x, 0).module.dim(), 0);
        // square at (1,1): pushout of the two legs
        let alg = dual_numbers(2);
        let lam = Module::regular(&alg);
        let c = Diagram::constant(&square(), &lam);
        assert_eq!(latching(&c, 3).module.dim(), 2);
        assert_eq!(matching(&c, 0).module.dim(), 2);
    }

    #[test]
    fn latching_of_represented_functors() {
        let alg = dual_numbers(3);
        let lam = Module::regular(&alg);
        let sq = square();
        for i in 0..4 {
            let x = Diagram::free_at(&sq, i, &lam);
            for j in 0..4 {
                let l = latching(&x, j);
                if i == j {
                    assert!(l.map.is_injective());
                    assert_eq!(x.obj(j).dim() - l.module.dim(), lam.dim());
                } else {
                    assert!(l.map.is_iso(), "i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn recognition_examples() {
        let alg = dual_numbers(2);
        let lam = Module::regular(&alg);
        let a = arrow();
        assert!(!is_gproj(&Diagram::stalk(&a, 0, &k(&alg))));
        let proj = Matrix::from_rows(2, 1, 2, &[vec![1, 0]]).unwrap();
        let lk = Diagram::new(&a, &alg, vec![lam.clone(), k(&alg)], vec![proj]).unwrap();
        assert!(is_ginj(&lk));
        let l0 = Diagram::new(&a, &alg, vec![lam.clone(), Module::zero(&alg)], vec![Matrix::zeros(2, 0, 2)]).unwrap();
        assert!(is_wtriv(&l0));
        assert!(is_gproj(&Diagram::free_at(&a, 0, &lam)));
        let z = Diagram::zero(&square(), &alg);
        assert!(is_gproj(&z) && is_ginj(&z) && is_wtriv(&z));
    }

    #[test]
    fn stalk_presentations_split() {
        let alg = dual_numbers(2);
        let lam = Module::regular(&alg);
        let sq = square();
        for j in 0..4 {
            let c = stalk_presentation(&sq, j, &lam);
            c.verify().unwrap();
            assert!(degreewise_splitting(&c).is_some());
            let d = stalk_copresentation(&sq, j, &lam);
            d.verify().unwrap();
            assert!(degreewise_splitting(&d).is_some());
        }
        // maximal object: nothing latches
        let c = stalk_presentation(&sq, 3, &lam);
        assert!(c.first().is_zero());
        let a = stalk_presentation(&arrow(), 0, &k(&alg));
        assert_eq!(a.first().dims(), vec![0, 1]);
    }

    #[test]
    fn gproj_colimit_matches_pushout() {
        let alg = dual_numbers(2);
        let lam = Module::regular(&alg);
        let soc = Matrix::from_rows(2, 2, 1, &[vec![0], vec![1]]).unwrap();
        let x = Diagram::new(&span(), &alg, vec![k(&alg), lam.clone(), lam], vec![soc.clone(), soc]).unwrap();
        assert!(is_gproj(&x));
        assert_eq!(colim_gproj(&x).unwrap().module.dim(), 3);
        assert!(colim_gproj(&Diagram::stalk(&arrow(), 0, &k(&alg))).is_err());
    }

    #[test]
    fn left_kan_examples() {
        let x = socle_arrow();
        let u = CatFunctor::to_point(&arrow());
        let lk = gproj_left_kan(&u, &x).unwrap();
        assert_eq!(lk.diagram.obj(0).dim(), 2);
        let alg = x.alg().clone();
        let lam = Module::regular(&alg);
        let (_, inc0) = shapes::full_subcategory(&arrow(), &[0]);
        let p = Diagram::constant(&inc0.source, &lam);
        let ext = gproj_left_kan(&inc0, &p).unwrap();
        assert_eq!(ext.diagram.dims(), vec![2, 2]);
        assert!(ext.diagram.map(2).is_iso());
        // adjunction identity against restriction
        let y = Diagram::constant(&arrow(), &lam);
        assert_eq!(hom_dim_diagrams(&ext.diagram, &y).unwrap(), hom_dim_diagrams(&p, &y.restrict(&inc0)).unwrap());
    }

    #[test]
    fn right_kan_is_dual() {
        let alg = dual_numbers(2);
        let lam = Module::regular(&alg);
        let u = CatFunctor::to_point(&arrow());
        let proj = Matrix::from_rows(2, 1, 2, &[vec![1, 0]]).unwrap();
        let y = Diagram::new(&arrow(), &alg, vec![lam, k(&alg)], vec![proj]).unwrap();
        let rk = ginj_right_kan(&u, &y).unwrap();
        assert_eq!(rk.diagram.obj(0).dim(), 2);
        assert!(rk.adjunction_map.is_natural());
    }

    #[test]
    fn embedding_into_projectives() {
        let g = socle_arrow();
        let e = embed_gproj_into_proj(&g).unwrap();
        e.verify().unwrap();
        assert_eq!(e.middle().dims(), vec![2, 4]);
        assert!(is_projective_diagram(e.middle()));
        assert!(is_gproj(e.last()));
        let lam = Module::regular(g.alg());
        let q = Diagram::free_at(&arrow(), 0, &lam);
        assert!(embed_gproj_into_proj(&q).unwrap().last().is_zero());
    }

    #[test]
    fn approximations() {
        let alg = dual_numbers(2);
        let z = Diagram::stalk(&arrow(), 0, &k(&alg));
        let a = approx_gproj(&z).unwrap();
        let w = a.conflation.first();
        for test in [socle_arrow(), Diagram::free_at(&arrow(), 1, &Module::regular(&alg))] {
            assert_eq!(ext1_dim(&test, w).unwrap(), 0);
        }
        let h = hull_ginj(&socle_arrow()).unwrap();
        assert!(degreewise_splitting(&h.conflation).is_some());
        for i in 0..2 {
            assert!(is_stable_iso_map(&h.conflation.left.component(i)));
        }
        hull_wtriv(&z).unwrap();
        cover_wtriv(&z).unwrap();
    }

    #[test]
    fn equivalence_roundtrip() {
        let alg = dual_numbers(2);
        for g in [socle_arrow(), Diagram::constant(&point(), &k(&alg)), Diagram::free_at(&arrow(), 0, &k(&alg))] {
            if !is_gproj(&g) {
                continue;
            }
            let theta = stable_roundtrip(&g).unwrap();
            for i in 0..g.shape().n_objects() {
                assert!(is_stable_iso_map(&theta.component(i)));
            }
            let fg = stable_equiv_f(&g).unwrap();
            let fid = stable_equiv_f_map(&DiagramMap::identity(&g), &fg, &fg).unwrap();
            for i in 0..g.shape().n_objects() {
                assert!(is_stable_iso_map(&fid.component(i)));
            }
        }
    }
}
