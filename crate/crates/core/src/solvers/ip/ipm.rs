//! Mehrotra predictor-corrector for bounded-variable linear programs.
//!
//! Inequality rows get a bounded slack so the working form is
//! `A w = b, lo <= w <= hi`. Gaps to finite bounds are kept strictly positive
//! and paired with multipliers `z_lo`, `z_hi`. Free variables carry no barrier
//! term; they are eliminated through a Schur complement
//! `S = A_F' M^{-1} A_F` where `M = A_B D^{-1} A_B'` over bounded columns.
//! `M` is block diagonal whenever rows only share bounded columns in small
//! groups (each QR equality row is its own block), so it is factored block by
//! block.

use nalgebra::{DMatrix, DVector};

use super::{LinearProgram, LpSolution, LpStatus, SparseMatrix};
use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
use crate::types::SolverOptions;

const TOLERANCE: f64 = 1e-8;
const STEP_TO_BOUNDARY: f64 = 0.9995;
const DIVERGENCE: f64 = 1e10;
const REFINEMENT_STEPS: usize = 5;

/// Equality form `A w = b` with variable bounds.
struct WorkingForm {
    a: SparseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    n_orig: usize,
    /// internal row for each original row (`None` for rows bounded on neither side)
    row_map: Vec<Option<usize>>,
}

impl WorkingForm {
    fn new(lp: &LinearProgram) -> Result<Self> {
        let (m, n) = (lp.num_rows(), lp.num_vars());
        if lp.a.nrows() != m || lp.a.ncols() != n || lp.uc.len() != m || lp.lx.len() != n || lp.ux.len() != n {
            return Err(Error::Dimension("linear program dimensions are inconsistent".into()));
        }
        for j in 0..n {
            if !(lp.lx[j] <= lp.ux[j]) || lp.lx[j] == f64::INFINITY || lp.ux[j] == f64::NEG_INFINITY {
                return Err(Error::Config(format!("variable {j} has invalid bounds")));
            }
            if lp.lx[j] == lp.ux[j] {
                return Err(Error::Config(format!("variable {j} is fixed; substitute it out")));
            }
            if !lp.c[j].is_finite() {
                return Err(Error::Config(format!("cost {j} is not finite")));
            }
        }
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(lp.a.nnz() + m);
        let mut row_map = vec![None; m];
        let mut b = Vec::new();
        let mut lo = lp.lx.clone();
        let mut hi = lp.ux.clone();
        let mut c = lp.c.clone();
        let mut kept = 0;
        for i in 0..m {
            let (l, u) = (lp.lc[i], lp.uc[i]);
            if !(l <= u) || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::Config(format!("row {i} has invalid bounds")));
            }
            if l == f64::NEG_INFINITY && u == f64::INFINITY {
                continue;
            }
            row_map[i] = Some(kept);
            if l == u {
                b.push(l);
            } else {
                // a_i' x - s = 0 with l <= s <= u
                let s = c.len();
                c.push(0.0);
                lo.push(l);
                hi.push(u);
                triplets.push((kept, s, -1.0));
                b.push(0.0);
            }
            kept += 1;
        }
        for col in 0..n {
            for (r, v) in lp.a.column(col) {
                if let Some(ri) = row_map[r] {
                    triplets.push((ri, col, v));
                }
            }
        }
        let a = SparseMatrix::from_triplets(kept, c.len(), &triplets);
        Ok(Self { a, b, c, lo, hi, n_orig: n, row_map })
    }

    fn is_free(&self, j: usize) -> bool {
        !self.lo[j].is_finite() && !self.hi[j].is_finite()
    }
}

struct Block {
    rows: Vec<usize>,
    /// bounded columns with entries in this block: (column, [(local row, value)])
    columns: Vec<(usize, Vec<(usize, f64)>)>,
    /// free-column entries restricted to the block rows (|rows| x f)
    af: DMatrix<f64>,
}

/// Block partition of the rows induced by the bounded columns.
struct Structure {
    blocks: Vec<Block>,
    free: Vec<usize>,
    bounded: Vec<usize>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl Structure {
    fn new(form: &WorkingForm) -> Self {
        let m = form.b.len();
        let nvar = form.c.len();
        let free: Vec<usize> = (0..nvar).filter(|&j| form.is_free(j)).collect();
        let bounded: Vec<usize> = (0..nvar).filter(|&j| !form.is_free(j)).collect();
        let mut parent: Vec<usize> = (0..m).collect();
        for &j in &bounded {
            let mut rows = form.a.column(j).map(|(r, _)| r);
            if let Some(first) = rows.next() {
                for r in rows {
                    let (ra, rb) = (find(&mut parent, first), find(&mut parent, r));
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
            }
        }
        let mut block_of_root = vec![usize::MAX; m];
        let mut local = vec![0usize; m];
        let mut blocks: Vec<Block> = Vec::new();
        for r in 0..m {
            let root = find(&mut parent, r);
            if block_of_root[root] == usize::MAX {
                block_of_root[root] = blocks.len();
                blocks.push(Block { rows: Vec::new(), columns: Vec::new(), af: DMatrix::zeros(0, 0) });
            }
            let blk = &mut blocks[block_of_root[root]];
            local[r] = blk.rows.len();
            blk.rows.push(r);
        }
        let block_of_row: Vec<usize> = (0..m).map(|r| block_of_root[find(&mut parent, r)]).collect();
        for &j in &bounded {
            let entries: Vec<(usize, f64)> = form.a.column(j).collect();
            if let Some(&(r0, _)) = entries.first() {
                let bi = block_of_row[r0];
                let loc = entries.iter().map(|&(r, v)| (local[r], v)).collect();
                blocks[bi].columns.push((j, loc));
            }
        }
        for blk in &mut blocks {
            blk.af = DMatrix::zeros(blk.rows.len(), free.len());
        }
        for (fi, &j) in free.iter().enumerate() {
            for (r, v) in form.a.column(j) {
                blocks[block_of_row[r]].af[(local[r], fi)] = v;
            }
        }
        Self { blocks, free, bounded }
    }
}

/// Factored Newton system for one interior-point iteration.
struct NewtonSystem<'a> {
    form: &'a WorkingForm,
    structure: &'a Structure,
    d: &'a [f64],
    block_factors: Vec<SpdFactor>,
    /// M_R^{-1} A_F[R] per block
    z: Vec<DMatrix<f64>>,
    schur: Option<SpdFactor>,
}

impl<'a> NewtonSystem<'a> {
    fn new(form: &'a WorkingForm, structure: &'a Structure, d: &'a [f64]) -> Result<Self> {
        let f = structure.free.len();
        let mut block_factors = Vec::with_capacity(structure.blocks.len());
        let mut z = Vec::with_capacity(structure.blocks.len());
        let mut s = DMatrix::zeros(f, f);
        for blk in &structure.blocks {
            let size = blk.rows.len();
            let mut mb = DMatrix::zeros(size, size);
            for (j, entries) in &blk.columns {
                let inv = 1.0 / d[*j];
                for &(ra, va) in entries {
                    for &(rb, vb) in entries {
                        mb[(ra, rb)] += va * vb * inv;
                    }
                }
            }
            let factor = SpdFactor::new(mb)?;
            if f > 0 {
                let zb = factor.solve_matrix(&blk.af);
                s += blk.af.tr_mul(&zb);
                z.push(zb);
            } else {
                z.push(DMatrix::zeros(size, 0));
            }
            block_factors.push(factor);
        }
        let schur = if f > 0 { Some(SpdFactor::new(s)?) } else { None };
        Ok(Self { form, structure, d, block_factors, z, schur })
    }

    /// Solves `A dw = rp`, `A' dy - D dw = h` (D = 0 on free columns).
    /// Iterative refinement repairs the accuracy lost to ill-conditioned
    /// scalings near the optimum and to ridged factors.
    fn solve_refined(&self, rp: &[f64], h: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut dw, mut dy) = self.solve(rp, h);
        let scale = norm(rp).max(norm(h)).max(f64::MIN_POSITIVE);
        for _ in 0..REFINEMENT_STEPS {
            let adw = self.form.a.mul_vec(&dw);
            let aty = self.form.a.tr_mul_vec(&dy);
            let res_p: Vec<f64> = (0..rp.len()).map(|i| rp[i] - adw[i]).collect();
            let mut res_d: Vec<f64> = (0..h.len()).map(|j| h[j] - aty[j]).collect();
            for &j in &self.structure.bounded {
                res_d[j] += self.d[j] * dw[j];
            }
            if norm(&res_p).max(norm(&res_d)) <= 1e-14 * scale {
                break;
            }
            let (cw, cy) = self.solve(&res_p, &res_d);
            dw.iter_mut().zip(&cw).for_each(|(a, b)| *a += b);
            dy.iter_mut().zip(&cy).for_each(|(a, b)| *a += b);
        }
        (dw, dy)
    }

    fn solve(&self, rp: &[f64], h: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a = &self.form.a;
        let mut rhs = rp.to_vec();
        for &j in &self.structure.bounded {
            let scale = h[j] / self.d[j];
            for (r, v) in a.column(j) {
                rhs[r] += v * scale;
            }
        }
        // t = M^{-1} rhs
        let mut t = vec![0.0; rp.len()];
        for (blk, factor) in self.structure.blocks.iter().zip(&self.block_factors) {
            let mut local = DVector::from_iterator(blk.rows.len(), blk.rows.iter().map(|&r| rhs[r]));
            factor.solve_mut(&mut local);
            for (li, &r) in blk.rows.iter().enumerate() {
                t[r] = local[li];
            }
        }
        let f = self.structure.free.len();
        let mut dw = vec![0.0; self.form.c.len()];
        let mut dy = t;
        if let Some(schur) = &self.schur {
            // dw_F = S^{-1} (A_F' t - h_F)
            let mut g = DVector::zeros(f);
            for blk in &self.structure.blocks {
                for (li, &r) in blk.rows.iter().enumerate() {
                    let tr = dy[r];
                    if tr != 0.0 {
                        for fi in 0..f {
                            g[fi] += blk.af[(li, fi)] * tr;
                        }
                    }
                }
            }
            for (fi, &j) in self.structure.free.iter().enumerate() {
                g[fi] -= h[j];
            }
            schur.solve_mut(&mut g);
            for (fi, &j) in self.structure.free.iter().enumerate() {
                dw[j] = g[fi];
            }
            for (blk, zb) in self.structure.blocks.iter().zip(&self.z) {
                let corr = zb * &g;
                for (li, &r) in blk.rows.iter().enumerate() {
                    dy[r] -= corr[li];
                }
            }
        }
        for &j in &self.structure.bounded {
            let aty: f64 = a.column(j).map(|(r, v)| v * dy[r]).sum();
            dw[j] = (aty - h[j]) / self.d[j];
        }
        (dw, dy)
    }
}

fn max_step(gap: &[f64], dgap: &[f64]) -> f64 {
    gap.iter()
        .zip(dgap)
        .filter(|(_, d)| **d < 0.0)
        .map(|(g, d)| -g / d)
        .fold(1.0, f64::min)
}

struct Point {
    w: Vec<f64>,
    y: Vec<f64>,
    zl: Vec<f64>,
    zu: Vec<f64>,
}

/// Indices of finite lower and upper bounds.
struct Bounds {
    lower: Vec<usize>,
    upper: Vec<usize>,
}

impl Bounds {
    fn gaps(&self, form: &WorkingForm, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            self.lower.iter().map(|&j| w[j] - form.lo[j]).collect(),
            self.upper.iter().map(|&j| form.hi[j] - w[j]).collect(),
        )
    }
}

fn starting_point(form: &WorkingForm, structure: &Structure, bounds: &Bounds) -> Result<Point> {
    let nvar = form.c.len();
    let m = form.b.len();
    let two_sided = |j: usize| form.lo[j].is_finite() && form.hi[j].is_finite();
    let mut w: Vec<f64> = (0..nvar)
        .map(|j| {
            let (l, u) = (form.lo[j], form.hi[j]);
            match (l.is_finite(), u.is_finite()) {
                (true, true) => 0.5 * (l + u),
                (true, false) => l + 1.0,
                (false, true) => u - 1.0,
                (false, false) => 0.0,
            }
        })
        .collect();
    let unit = vec![1.0; nvar];
    let sys = NewtonSystem::new(form, structure, &unit)?;

    // least-change correction toward A w = b
    let aw = form.a.mul_vec(&w);
    let rp: Vec<f64> = (0..m).map(|i| form.b[i] - aw[i]).collect();
    let (dw, _) = sys.solve(&rp, &vec![0.0; nvar]);
    for j in 0..nvar {
        if !two_sided(j) {
            w[j] += dw[j];
        }
    }

    // least-squares multipliers: z = c - A'y on bounded columns
    let (zc, y) = sys.solve(&vec![0.0; m], &form.c);
    let mut zl: Vec<f64> = bounds
        .lower
        .iter()
        .map(|&j| if two_sided(j) { (-zc[j]).max(0.0) } else { -zc[j] })
        .collect();
    let mut zu: Vec<f64> = bounds
        .upper
        .iter()
        .map(|&j| if two_sided(j) { zc[j].max(0.0) } else { zc[j] })
        .collect();
    let (mut gl, mut gu) = bounds.gaps(form, &w);

    // Mehrotra shifts; two-sided variables stay at the midpoint
    let one_sided_gaps = || {
        gl.iter()
            .zip(&bounds.lower)
            .chain(gu.iter().zip(&bounds.upper))
            .filter(|(_, &j)| !two_sided(j))
            .map(|(g, _)| *g)
            .collect::<Vec<f64>>()
    };
    let min_gap = one_sided_gaps().into_iter().fold(f64::INFINITY, f64::min);
    let min_z = zl.iter().chain(&zu).copied().fold(f64::INFINITY, f64::min);
    let dg = if min_gap.is_finite() { (-1.5 * min_gap).max(0.0) } else { 0.0 };
    let dz = if min_z.is_finite() { (-1.5 * min_z).max(0.0) } else { 0.0 };
    let shift_gaps = |gl: &mut Vec<f64>, gu: &mut Vec<f64>, by: f64| {
        for (g, &j) in gl.iter_mut().zip(&bounds.lower).chain(gu.iter_mut().zip(&bounds.upper)) {
            if !two_sided(j) {
                *g += by;
            }
        }
    };
    shift_gaps(&mut gl, &mut gu, dg);
    zl.iter_mut().chain(zu.iter_mut()).for_each(|z| *z += dz);

    let gz: f64 = gl.iter().zip(&zl).chain(gu.iter().zip(&zu)).map(|(g, z)| g * z).sum();
    let sum_g: f64 = gl.iter().chain(&gu).sum();
    let sum_z: f64 = zl.iter().chain(&zu).sum();
    if gz > 0.0 {
        shift_gaps(&mut gl, &mut gu, 0.5 * gz / sum_z);
        let dz = 0.5 * gz / sum_g;
        zl.iter_mut().chain(zu.iter_mut()).for_each(|z| *z += dz);
    }
    let scale = form.c.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let floor = 1e-2 * scale;
    zl.iter_mut().chain(zu.iter_mut()).for_each(|z| *z = z.max(floor));
    for (t, &j) in bounds.lower.iter().enumerate() {
        if !two_sided(j) {
            gl[t] = gl[t].max(1e-2);
            w[j] = form.lo[j] + gl[t];
        }
    }
    for (t, &j) in bounds.upper.iter().enumerate() {
        if !two_sided(j) {
            gu[t] = gu[t].max(1e-2);
            w[j] = form.hi[j] - gu[t];
        }
    }
    Ok(Point { w, y, zl, zu })
}

/// Solves `lp` to relative primal, dual and gap tolerances of 1e-8.
pub fn solve_lp(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
    let form = WorkingForm::new(lp)?;
    let structure = Structure::new(&form);
    let nvar = form.c.len();
    let m = form.b.len();
    let bounds = Bounds {
        lower: (0..nvar).filter(|&j| form.lo[j].is_finite()).collect(),
        upper: (0..nvar).filter(|&j| form.hi[j].is_finite()).collect(),
    };
    let nb = (bounds.lower.len() + bounds.upper.len()).max(1) as f64;
    let b_norm = form.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = form.c.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut pt = starting_point(&form, &structure, &bounds)?;
    let mut status = LpStatus::MaxIter;
    let mut iterations = 0;
    let mut rel_p;
    let mut rel_d;

    loop {
        let (gl, gu) = bounds.gaps(&form, &pt.w);
        let aw = form.a.mul_vec(&pt.w);
        let rp: Vec<f64> = (0..m).map(|i| form.b[i] - aw[i]).collect();
        let aty = form.a.tr_mul_vec(&pt.y);
        let mut rd: Vec<f64> = (0..nvar).map(|j| form.c[j] - aty[j]).collect();
        for (t, &j) in bounds.lower.iter().enumerate() {
            rd[j] -= pt.zl[t];
        }
        for (t, &j) in bounds.upper.iter().enumerate() {
            rd[j] += pt.zu[t];
        }
        let gz: f64 = gl.iter().zip(&pt.zl).map(|(g, z)| g * z).sum::<f64>()
            + gu.iter().zip(&pt.zu).map(|(g, z)| g * z).sum::<f64>();
        let mu = gz / nb;

        let pobj = objective(&form, &pt.w);
        let dobj = dual_objective(&form, &bounds, &pt);
        rel_p = norm(&rp) / (1.0 + b_norm);
        rel_d = norm(&rd) / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        if rel_p <= TOLERANCE && rel_d <= TOLERANCE && gap <= TOLERANCE {
            status = LpStatus::Optimal;
            break;
        }
        if iterations >= 5 {
            if dobj > DIVERGENCE && rel_d <= 1e-6 {
                status = LpStatus::Infeasible;
                break;
            }
            if pobj < -DIVERGENCE && rel_p <= 1e-6 {
                status = LpStatus::Unbounded;
                break;
            }
            // a diverging dual ray certifies primal infeasibility
            let zmax = pt.zl.iter().chain(&pt.zu).chain(&pt.y).fold(0.0f64, |a, v| a.max(v.abs()));
            if zmax > DIVERGENCE * (1.0 + c_norm) {
                status = LpStatus::Infeasible;
                break;
            }
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let mut d = vec![0.0; nvar];
        for (t, &j) in bounds.lower.iter().enumerate() {
            d[j] += pt.zl[t] / gl[t];
        }
        for (t, &j) in bounds.upper.iter().enumerate() {
            d[j] += pt.zu[t] / gu[t];
        }
        let sys = NewtonSystem::new(&form, &structure, &d)?;

        let direction = |cl: &[f64], cu: &[f64]| {
            let mut h = rd.clone();
            for (t, &j) in bounds.lower.iter().enumerate() {
                h[j] -= cl[t] / gl[t];
            }
            for (t, &j) in bounds.upper.iter().enumerate() {
                h[j] += cu[t] / gu[t];
            }
            let (dw, dy) = sys.solve_refined(&rp, &h);
            let dgl: Vec<f64> = bounds.lower.iter().map(|&j| dw[j]).collect();
            let dgu: Vec<f64> = bounds.upper.iter().map(|&j| -dw[j]).collect();
            let dzl: Vec<f64> = (0..gl.len()).map(|t| (cl[t] - pt.zl[t] * dgl[t]) / gl[t]).collect();
            let dzu: Vec<f64> = (0..gu.len()).map(|t| (cu[t] - pt.zu[t] * dgu[t]) / gu[t]).collect();
            (dw, dy, dgl, dgu, dzl, dzu)
        };

        // predictor
        let cl: Vec<f64> = gl.iter().zip(&pt.zl).map(|(g, z)| -g * z).collect();
        let cu: Vec<f64> = gu.iter().zip(&pt.zu).map(|(g, z)| -g * z).collect();
        let (_, _, dgl, dgu, dzl, dzu) = direction(&cl, &cu);
        let ap = max_step(&gl, &dgl).min(max_step(&gu, &dgu));
        let ad = max_step(&pt.zl, &dzl).min(max_step(&pt.zu, &dzu));
        let mu_aff = (gl.iter().zip(&dgl).zip(pt.zl.iter().zip(&dzl)))
            .map(|((g, dg), (z, dz))| (g + ap * dg) * (z + ad * dz))
            .sum::<f64>()
            + (gu.iter().zip(&dgu).zip(pt.zu.iter().zip(&dzu)))
                .map(|((g, dg), (z, dz))| (g + ap * dg) * (z + ad * dz))
                .sum::<f64>();
        let mu_aff = mu_aff / nb;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };

        // corrector
        let cl: Vec<f64> = (0..gl.len()).map(|t| sigma * mu - gl[t] * pt.zl[t] - dgl[t] * dzl[t]).collect();
        let cu: Vec<f64> = (0..gu.len()).map(|t| sigma * mu - gu[t] * pt.zu[t] - dgu[t] * dzu[t]).collect();
        let (dw, dy, dgl, dgu, dzl, dzu) = direction(&cl, &cu);
        let ap = (STEP_TO_BOUNDARY * max_step(&gl, &dgl).min(max_step(&gu, &dgu))).min(1.0);
        let ad = (STEP_TO_BOUNDARY * max_step(&pt.zl, &dzl).min(max_step(&pt.zu, &dzu))).min(1.0);

        for j in 0..nvar {
            pt.w[j] += ap * dw[j];
        }
        for i in 0..m {
            pt.y[i] += ad * dy[i];
        }
        for t in 0..pt.zl.len() {
            pt.zl[t] += ad * dzl[t];
        }
        for t in 0..pt.zu.len() {
            pt.zu[t] += ad * dzu[t];
        }
        if pt.w.iter().chain(&pt.y).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("interior point iterate became non-finite at iteration {iterations}")));
        }
    }

    let x = pt.w[..form.n_orig].to_vec();
    let dual = form.row_map.iter().map(|r| r.map_or(0.0, |i| pt.y[i])).collect();
    Ok(LpSolution {
        objective: lp.objective_at(&x),
        dual_objective: dual_objective(&form, &bounds, &pt) + lp.c0,
        x,
        dual,
        status,
        iterations,
        primal_residual: rel_p,
        dual_residual: rel_d,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn objective(form: &WorkingForm, w: &[f64]) -> f64 {
    form.c.iter().zip(w).map(|(c, w)| c * w).sum()
}

fn dual_objective(form: &WorkingForm, bounds: &Bounds, pt: &Point) -> f64 {
    let by: f64 = form.b.iter().zip(&pt.y).map(|(b, y)| b * y).sum();
    let lz: f64 = bounds.lower.iter().zip(&pt.zl).map(|(&j, z)| form.lo[j] * z).sum();
    let uz: f64 = bounds.upper.iter().zip(&pt.zu).map(|(&j, z)| form.hi[j] * z).sum();
    by + lz - uz
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Algorithm;

    const INF: f64 = f64::INFINITY;

    fn lp(c: Vec<f64>, rows: &[&[f64]], lc: Vec<f64>, uc: Vec<f64>, lx: Vec<f64>, ux: Vec<f64>) -> LinearProgram {
        let n = c.len();
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                trip.push((i, j, v));
            }
        }
        LinearProgram { c, c0: 0.0, a: SparseMatrix::from_triplets(rows.len(), n, &trip), lc, uc, lx, ux }
    }

    fn opts() -> SolverOptions {
        SolverOptions::new(Algorithm::Ip)
    }

    #[test]
    fn bound_active_optimum() {
        let prob = lp(vec![1.0], &[], vec![], vec![], vec![1.0], vec![INF]);
        let sol = solve_lp(&prob, &opts()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-7);
        assert!((sol.objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn one_sided_slack() {
        let prob = lp(vec![1.0, 1.0], &[&[1.0, -1.0]], vec![3.0], vec![3.0], vec![0.0, 0.0], vec![INF, INF]);
        let sol = solve_lp(&prob, &opts()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-7 && sol.x[1].abs() < 1e-7);
        assert!(sol.relative_gap() <= 1e-8);
    }

    #[test]
    fn free_variables_and_inequalities() {
        // min -x - y s.t. x + 2y <= 4, 3x + y <= 6, x, y free but x >= -10
        let prob = lp(
            vec![-1.0, -1.0],
            &[&[1.0, 2.0], &[3.0, 1.0]],
            vec![-INF, -INF],
            vec![4.0, 6.0],
            vec![-10.0, -INF],
            vec![INF, INF],
        );
        let sol = solve_lp(&prob, &opts()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.6).abs() < 1e-6 && (sol.x[1] - 1.2).abs() < 1e-6, "{:?}", sol.x);
        assert!((sol.objective + 2.8).abs() < 1e-7);
        assert!(prob.max_violation(&sol.x) < 1e-7);
    }

    #[test]
    fn two_sided_bounds() {
        // max x + y with 0 <= x <= 2, 0 <= y <= 3, x + y <= 4
        let prob = lp(vec![-1.0, -1.0], &[&[1.0, 1.0]], vec![-INF], vec![4.0], vec![0.0, 0.0], vec![2.0, 3.0]);
        let sol = solve_lp(&prob, &opts()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 4.0).abs() < 1e-7);
    }

    #[test]
    fn detects_infeasible() {
        let prob = lp(vec![1.0], &[&[1.0]], vec![-INF], vec![0.0], vec![1.0], vec![INF]);
        let sol = solve_lp(&prob, &opts()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let prob = lp(vec![-1.0, 0.0], &[&[1.0, -1.0]], vec![0.0], vec![0.0], vec![0.0, 0.0], vec![INF, INF]);
        let sol = solve_lp(&prob, &opts()).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn rejects_malformed() {
        let prob = lp(vec![1.0], &[], vec![], vec![], vec![2.0], vec![1.0]);
        assert!(solve_lp(&prob, &opts()).is_err());
    }

    #[test]
    fn deterministic() {
        let prob = lp(
            vec![-1.0, -1.0],
            &[&[1.0, 2.0], &[3.0, 1.0]],
            vec![-INF, -INF],
            vec![4.0, 6.0],
            vec![0.0, 0.0],
            vec![INF, INF],
        );
        let a = solve_lp(&prob, &opts()).unwrap();
        let b = solve_lp(&prob, &opts()).unwrap();
        assert_eq!(a, b);
    }
}
