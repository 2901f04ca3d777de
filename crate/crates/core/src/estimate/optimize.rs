//! Derivative-free maximizers used by the likelihood fits.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Result of a local maximization.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section maximization of `f` on `[lo, hi]` until the bracket is
/// narrower than `tol` (absolute, in the units of `x`).
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<Optimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evaluations = 2;
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..max_iter {
        if b - a <= tol {
            // the endpoints are never evaluated, so check them once at the end
            for x in [lo, hi] {
                let fx = f(x)?;
                evaluations += 1;
                if fx > best.1 {
                    best = (x, fx);
                }
            }
            return Ok(Optimum { x: alloc::vec![best.0], value: best.1, evaluations });
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            if fd > best.1 {
                best = (d, fd);
            }
        }
        evaluations += 1;
    }
    Err(Error::NotConverged { best: alloc::vec![best.0], value: best.1 })
}

/// Nelder–Mead maximization inside the box `bounds`, started from a simplex
/// with edge `step` around `x0`. Stops when both the spread of function values
/// (relative) and the simplex diameter fall below `tol`.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: f64,
    bounds: &[(f64, f64)],
    tol: f64,
    max_iter: usize,
) -> Result<Optimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> Result<f64> {
        *evaluations += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    clamp(&mut start);
    let v = eval(&start, &mut evaluations)?;
    simplex.push((start.clone(), v));
    for i in 0..n {
        let mut x = start.clone();
        // step inward when the start sits on the upper bound
        x[i] = if x[i] + step <= bounds[i].1 { x[i] + step } else { x[i] - step };
        clamp(&mut x);
        let v = eval(&x, &mut evaluations)?;
        simplex.push((x, v));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (best - worst).abs() <= tol * (best.abs() + 1e-12) && diameter <= tol {
            let (x, value) = simplex.swap_remove(0);
            return Ok(Optimum { x, value, evaluations });
        }

        let mut centroid = alloc::vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let toward = |t: f64, from: &[f64]| -> Vec<f64> {
            let mut x: Vec<f64> = centroid.iter().zip(from).map(|(c, w)| c + t * (w - c)).collect();
            clamp(&mut x);
            x
        };
        let worst_x = simplex[n].0.clone();
        let reflected = toward(-1.0, &worst_x);
        let fr = eval(&reflected, &mut evaluations)?;
        if fr > simplex[0].1 {
            let expanded = toward(-2.0, &worst_x);
            let fe = eval(&expanded, &mut evaluations)?;
            simplex[n] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr > worst {
            let x = toward(-0.5, &worst_x);
            let v = eval(&x, &mut evaluations)?;
            (x, v)
        } else {
            let x = toward(0.5, &worst_x);
            let v = eval(&x, &mut evaluations)?;
            (x, v)
        };
        if fc > worst.max(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut x: Vec<f64> = best_x.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            clamp(&mut x);
            let v = eval(&x, &mut evaluations)?;
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (best, value) = simplex.swap_remove(0);
    Err(Error::NotConverged { best, value })
}
