//! Batched LSTM and GRU cells with backpropagation through time.
//!
//! Weight layout, with `z = [x, h]` of width `C + H`:
//! - LSTM: `w` is `[C+H, 4H]` holding gates i, f, g, o; `b` is `[4H]`.
//! - GRU: `w` is `[C+H, 2H]` holding update z and reset r; `b` is `[2H]`;
//!   the candidate uses `wc` `[C+H, H]` on `[x, r⊙h]` and `bc` `[H]`.

use ndarray::{concatenate, s, Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis};

use super::variant::RecurrentKind;
use crate::error::{Error, Result};

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Borrowed weights for one direction of a recurrent layer.
#[derive(Debug, Clone, Copy)]
pub struct CellWeights<'a> {
    pub kind: RecurrentKind,
    pub w: ArrayView2<'a, f64>,
    pub b: ArrayView1<'a, f64>,
    /// GRU candidate weights; unused for LSTM.
    pub wc: Option<ArrayView2<'a, f64>>,
    pub bc: Option<ArrayView1<'a, f64>>,
}

impl CellWeights<'_> {
    pub fn hidden(&self) -> usize {
        self.w.ncols() / self.kind.gate_blocks()
    }

    pub fn input_size(&self) -> usize {
        self.w.nrows() - self.hidden()
    }

    fn check(&self) -> Result<()> {
        let h = self.hidden();
        let ok = self.w.ncols() == h * self.kind.gate_blocks()
            && self.w.nrows() > h
            && self.b.len() == self.w.ncols()
            && match self.kind {
                RecurrentKind::Lstm => true,
                RecurrentKind::Gru => matches!(
                    (self.wc, self.bc),
                    (Some(wc), Some(bc)) if wc.dim() == (self.w.nrows(), h) && bc.len() == h
                ),
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("inconsistent recurrent weight shapes".into()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellGrads {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub wc: Option<Array2<f64>>,
    pub bc: Option<Array1<f64>>,
}

impl CellGrads {
    fn zeros(cell: &CellWeights) -> Self {
        Self {
            w: Array2::zeros(cell.w.raw_dim()),
            b: Array1::zeros(cell.b.len()),
            wc: cell.wc.map(|m| Array2::zeros(m.raw_dim())),
            bc: cell.bc.map(|v| Array1::zeros(v.len())),
        }
    }
}

/// Hidden state, plus cell memory for LSTM (zero-width for GRU).
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Array2<f64>,
    pub c: Array2<f64>,
}

impl CellState {
    pub fn zeros(kind: RecurrentKind, batch: usize, hidden: usize) -> Self {
        let cw = if kind == RecurrentKind::Lstm { hidden } else { 0 };
        Self {
            h: Array2::zeros((batch, hidden)),
            c: Array2::zeros((batch, cw)),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().chain(self.c.iter()).all(|v| v.is_finite())
    }
}

enum StepCache {
    Lstm {
        z: Array2<f64>,
        i: Array2<f64>,
        f: Array2<f64>,
        g: Array2<f64>,
        o: Array2<f64>,
        c_prev: Array2<f64>,
        tanh_c: Array2<f64>,
    },
    Gru {
        z_in: Array2<f64>,
        zc_in: Array2<f64>,
        update: Array2<f64>,
        reset: Array2<f64>,
        cand: Array2<f64>,
        h_prev: Array2<f64>,
    },
}

fn step_forward(cell: &CellWeights, x: ArrayView2<f64>, state: &CellState) -> (CellState, StepCache) {
    let hd = cell.hidden();
    let z = concatenate![Axis(1), x, state.h];
    match cell.kind {
        RecurrentKind::Lstm => {
            let a = z.dot(&cell.w) + cell.b;
            let i = a.slice(s![.., 0..hd]).mapv(sigmoid);
            let f = a.slice(s![.., hd..2 * hd]).mapv(sigmoid);
            let g = a.slice(s![.., 2 * hd..3 * hd]).mapv(f64::tanh);
            let o = a.slice(s![.., 3 * hd..4 * hd]).mapv(sigmoid);
            let c = &f * &state.c + &i * &g;
            let tanh_c = c.mapv(f64::tanh);
            let h = &o * &tanh_c;
            (
                CellState { h, c },
                StepCache::Lstm {
                    z,
                    i,
                    f,
                    g,
                    o,
                    c_prev: state.c.clone(),
                    tanh_c,
                },
            )
        }
        RecurrentKind::Gru => {
            let wc = cell.wc.expect("checked");
            let bc = cell.bc.expect("checked");
            let a = z.dot(&cell.w) + cell.b;
            let update = a.slice(s![.., 0..hd]).mapv(sigmoid);
            let reset = a.slice(s![.., hd..2 * hd]).mapv(sigmoid);
            let rh = &reset * &state.h;
            let zc_in = concatenate![Axis(1), x, rh];
            let cand = (zc_in.dot(&wc) + bc).mapv(f64::tanh);
            let h = (1.0 - &update) * &state.h + &update * &cand;
            (
                CellState { h, c: state.c.clone() },
                StepCache::Gru {
                    z_in: z,
                    zc_in,
                    update,
                    reset,
                    cand,
                    h_prev: state.h.clone(),
                },
            )
        }
    }
}

/// Returns `(dx, dh_prev, dc_prev)` and accumulates weight gradients.
fn step_backward(
    cell: &CellWeights,
    cache: &StepCache,
    dh: &Array2<f64>,
    dc_next: &Array2<f64>,
    grads: &mut CellGrads,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let cin = cell.input_size();
    match cache {
        StepCache::Lstm {
            z,
            i,
            f,
            g,
            o,
            c_prev,
            tanh_c,
        } => {
            let d_o = dh * tanh_c;
            let dc = dc_next + &(dh * o * &tanh_c.mapv(|t| 1.0 - t * t));
            let d_i = &dc * g;
            let d_g = &dc * i;
            let d_f = &dc * c_prev;
            let dc_prev = &dc * f;
            let da_i = d_i * &i.mapv(|v| v * (1.0 - v));
            let da_f = d_f * &f.mapv(|v| v * (1.0 - v));
            let da_g = d_g * &g.mapv(|v| 1.0 - v * v);
            let da_o = d_o * &o.mapv(|v| v * (1.0 - v));
            let da = concatenate![Axis(1), da_i, da_f, da_g, da_o];
            grads.w += &z.t().dot(&da);
            grads.b += &da.sum_axis(Axis(0));
            let dz = da.dot(&cell.w.t());
            (
                dz.slice(s![.., ..cin]).to_owned(),
                dz.slice(s![.., cin..]).to_owned(),
                dc_prev,
            )
        }
        StepCache::Gru {
            z_in,
            zc_in,
            update,
            reset,
            cand,
            h_prev,
        } => {
            let wc = cell.wc.expect("checked");
            let d_update = dh * &(cand - h_prev);
            let d_cand = dh * update;
            let mut dh_prev = dh * &update.mapv(|u| 1.0 - u);
            let da_c = d_cand * &cand.mapv(|v| 1.0 - v * v);
            *grads.wc.as_mut().expect("gru") += &zc_in.t().dot(&da_c);
            *grads.bc.as_mut().expect("gru") += &da_c.sum_axis(Axis(0));
            let dzc = da_c.dot(&wc.t());
            let mut dx = dzc.slice(s![.., ..cin]).to_owned();
            let d_rh = dzc.slice(s![.., cin..]);
            let d_reset = &d_rh * h_prev;
            dh_prev += &(&d_rh * reset);
            let da_u = d_update * &update.mapv(|v| v * (1.0 - v));
            let da_r = d_reset * &reset.mapv(|v| v * (1.0 - v));
            let da = concatenate![Axis(1), da_u, da_r];
            grads.w += &z_in.t().dot(&da);
            grads.b += &da.sum_axis(Axis(0));
            let dz = da.dot(&cell.w.t());
            dx += &dz.slice(s![.., ..cin]);
            dh_prev += &dz.slice(s![.., cin..]);
            let dc_prev = Array2::zeros((dh.nrows(), 0));
            (dx, dh_prev, dc_prev)
        }
    }
}

/// One step for a single example. Errors if the new state is not finite.
pub fn recurrent_cell_step(cell: &CellWeights, x: ArrayView1<f64>, state: &CellState) -> Result<CellState> {
    cell.check()?;
    if x.len() != cell.input_size() || state.h.ncols() != cell.hidden() {
        return Err(Error::Shape("input or state width does not match cell".into()));
    }
    let x2 = x.insert_axis(Axis(0));
    let (next, _) = step_forward(cell, x2, state);
    if !next.is_finite() {
        return Err(Error::Numeric("recurrent state became non-finite".into()));
    }
    Ok(next)
}

pub(crate) struct DirectionCache {
    steps: Vec<StepCache>,
    reverse: bool,
    input_mask: Option<Array2<f64>>,
}

/// Unrolls one direction from a zero state. `input_mask` (`[batch, C]`) is
/// multiplied into every input step.
pub(crate) fn run_direction(
    cell: &CellWeights,
    inputs: ArrayView3<f64>,
    reverse: bool,
    input_mask: Option<Array2<f64>>,
) -> Result<(Array3<f64>, DirectionCache)> {
    cell.check()?;
    let (b, t, c) = inputs.dim();
    if c != cell.input_size() {
        return Err(Error::Shape(format!(
            "recurrent input has {c} channels, cell expects {}",
            cell.input_size()
        )));
    }
    let hd = cell.hidden();
    let mut state = CellState::zeros(cell.kind, b, hd);
    let mut out = Array3::zeros((b, t, hd));
    let mut steps = Vec::with_capacity(t);
    for s in 0..t {
        let ti = if reverse { t - 1 - s } else { s };
        let x = inputs.index_axis(Axis(1), ti);
        let (next, cache) = match &input_mask {
            Some(m) => step_forward(cell, (&x * m).view(), &state),
            None => step_forward(cell, x, &state),
        };
        out.index_axis_mut(Axis(1), ti).assign(&next.h);
        steps.push(cache);
        state = next;
    }
    if !state.is_finite() {
        return Err(Error::Numeric("recurrent state became non-finite".into()));
    }
    Ok((
        out,
        DirectionCache {
            steps,
            reverse,
            input_mask,
        },
    ))
}

pub(crate) fn backward_direction(
    cell: &CellWeights,
    cache: &DirectionCache,
    d_out: ArrayView3<f64>,
) -> (Array3<f64>, CellGrads) {
    let (b, t, _) = d_out.dim();
    let hd = cell.hidden();
    let mut grads = CellGrads::zeros(cell);
    let mut d_in = Array3::zeros((b, t, cell.input_size()));
    let mut dh_next = Array2::zeros((b, hd));
    let cw = if cell.kind == RecurrentKind::Lstm { hd } else { 0 };
    let mut dc_next = Array2::zeros((b, cw));
    for s in (0..t).rev() {
        let ti = if cache.reverse { t - 1 - s } else { s };
        let dh = &d_out.index_axis(Axis(1), ti) + &dh_next;
        let (mut dx, dh_prev, dc_prev) = step_backward(cell, &cache.steps[s], &dh, &dc_next, &mut grads);
        if let Some(m) = &cache.input_mask {
            dx *= m;
        }
        d_in.index_axis_mut(Axis(1), ti).assign(&dx);
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    (d_in, grads)
}

/// Runs a recurrent layer over every time step (inference, no dropout).
/// With a backward cell the output concatenates forward and backward
/// hidden states per step, giving width `2H`.
pub fn run_recurrent(
    forward: &CellWeights,
    backward: Option<&CellWeights>,
    inputs: ArrayView3<f64>,
) -> Result<Array3<f64>> {
    let (fwd, _) = run_direction(forward, inputs, false, None)?;
    match backward {
        None => Ok(fwd),
        Some(bc) => {
            let (bwd, _) = run_direction(bc, inputs, true, None)?;
            Ok(concatenate![Axis(2), fwd, bwd])
        }
    }
}
