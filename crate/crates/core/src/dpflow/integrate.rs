use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::LinearFlow;
use crate::linops::{norm_inf, Mat, Vector};
use crate::tolerances::SETTLE_RATE;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

/// Time-stamped states of one integration run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vector>,
    flow: LinearFlow,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    pub fn flow(&self) -> &LinearFlow {
        &self.flow
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &Vector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds the initial state")
    }

    /// `(t, state)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &Vector)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

struct Stepper<'f> {
    flow: &'f LinearFlow,
    method: Method,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'f> Stepper<'f> {
    fn new(flow: &'f LinearFlow, method: Method) -> Self {
        let n = flow.dim();
        Stepper {
            flow,
            method,
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
        }
    }

    fn eval(flow: &LinearFlow, x: &[f64], out: &mut [f64]) {
        flow.a().matvec_into(x, out);
        for (o, b) in out.iter_mut().zip(flow.b().iter()) {
            *o += b;
        }
    }

    fn step(&mut self, x: &mut [f64], h: f64) {
        let flow = self.flow;
        match self.method {
            Method::Euler => {
                Self::eval(flow, x, &mut self.k[0]);
                for (xi, ki) in x.iter_mut().zip(&self.k[0]) {
                    *xi += h * ki;
                }
            }
            Method::Rk4 => {
                let [k1, k2, k3, k4] = &mut self.k;
                Self::eval(flow, x, k1);
                for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k1.iter()) {
                    *t = xi + 0.5 * h * ki;
                }
                Self::eval(flow, &self.tmp, k2);
                for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k2.iter()) {
                    *t = xi + 0.5 * h * ki;
                }
                Self::eval(flow, &self.tmp, k3);
                for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k3.iter()) {
                    *t = xi + h * ki;
                }
                Self::eval(flow, &self.tmp, k4);
                for i in 0..x.len() {
                    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
    }
}

fn check_inputs(flow: &LinearFlow, x0: &[f64], dt: f64, t_final: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Invalid {
            field: "dt",
            reason: format!("{dt} is not positive"),
        });
    }
    if !(t_final >= dt && t_final.is_finite()) {
        return Err(Error::Invalid {
            field: "t_final",
            reason: format!("{t_final} is smaller than dt = {dt}"),
        });
    }
    if x0.len() != flow.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, flow dimension is {}",
            x0.len(),
            flow.dim()
        )));
    }
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    Ok(())
}

/// Integrates `flow` from `x0` over `[0, t_final]` with a fixed step,
/// recording every step.
pub fn integrate(
    flow: &LinearFlow,
    x0: &[f64],
    dt: f64,
    t_final: f64,
    method: Method,
) -> Result<Trajectory> {
    integrate_with(flow, x0, dt, t_final, method, 1)
}

/// Like [`integrate`] but records only every `decimation`-th step (the
/// initial and final states are always kept).
///
/// Step `k` ends at `k·dt`; the last step is shortened so the run ends
/// exactly at `t_final`.
pub fn integrate_with(
    flow: &LinearFlow,
    x0: &[f64],
    dt: f64,
    t_final: f64,
    method: Method,
    decimation: usize,
) -> Result<Trajectory> {
    check_inputs(flow, x0, dt, t_final)?;
    if decimation == 0 {
        return Err(Error::Invalid {
            field: "decimation",
            reason: "must be at least 1".into(),
        });
    }
    let steps = libm::ceil(t_final / dt - 1e-9).max(1.0) as usize;
    let mut times = Vec::with_capacity(steps / decimation + 2);
    let mut states = Vec::with_capacity(steps / decimation + 2);
    let mut x = x0.to_vec();
    times.push(0.0);
    states.push(Vector::from(x.clone()));

    let mut stepper = Stepper::new(flow, method);
    let mut t_prev = 0.0;
    for k in 1..=steps {
        let t = if k == steps { t_final } else { k as f64 * dt };
        stepper.step(&mut x, t - t_prev);
        t_prev = t;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationNonFinite { time: t });
        }
        if k % decimation == 0 || k == steps {
            times.push(t);
            states.push(Vector::from(x.clone()));
        }
    }
    Ok(Trajectory {
        times,
        states,
        flow: flow.clone(),
    })
}

/// One fixed step of a linear flow written as the affine map
/// `x ↦ T x + c`. Composing the map with itself advances by twice as many
/// steps, which makes very long horizons cheap.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    t: Mat,
    c: Vector,
    steps: u64,
}

impl Propagator {
    /// The map of a single step of size `h`.
    ///
    /// RK4 on a linear flow is `T = Σ_{k≤4} (hA)^k / k!` and
    /// `c = h Σ_{k≤3} (hA)^k / (k+1)! · b`; Euler is `T = I + hA`, `c = h b`.
    pub fn new(flow: &LinearFlow, h: f64, method: Method) -> Self {
        let n = flow.dim();
        let ha = flow.a().scale(h);
        let order = match method {
            Method::Euler => 1,
            Method::Rk4 => 4,
        };
        let mut t = Mat::identity(n);
        let mut s = Mat::identity(n);
        let mut power = Mat::identity(n);
        let mut fact = 1.0;
        for k in 1..=order {
            power = power.matmul(&ha);
            fact *= k as f64;
            t = t.add(&power.scale(1.0 / fact));
            if k < order {
                s = s.add(&power.scale(1.0 / (fact * (k + 1) as f64)));
            }
        }
        let c = s.matvec(flow.b()).scale(h);
        Propagator { t, c, steps: 1 }
    }

    pub fn apply(&self, x: &[f64]) -> Vector {
        self.t.matvec(x).add(&self.c)
    }

    /// The map of twice as many steps.
    pub fn doubled(&self) -> Self {
        Propagator {
            t: self.t.matmul(&self.t),
            c: self.t.matvec(&self.c).add(&self.c),
            steps: self.steps * 2,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Propagator) -> Self {
        Propagator {
            t: next.t.matmul(&self.t),
            c: next.t.matvec(&self.c).add(&next.c),
            steps: self.steps + next.steps,
        }
    }

    /// The map of `n` applications of `self`, by repeated squaring.
    pub fn repeated(&self, mut n: u64) -> Self {
        let dim = self.c.len();
        let mut acc = Propagator {
            t: Mat::identity(dim),
            c: Vector::zeros(dim),
            steps: 0,
        };
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.then(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.doubled();
            }
        }
        acc
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn matrix(&self) -> &Mat {
        &self.t
    }
}

/// Final state of the run [`integrate`] would perform, computed by
/// composing step maps instead of stepping. Agrees with stepping up to
/// rounding; intended for very long horizons.
pub fn propagate(
    flow: &LinearFlow,
    x0: &[f64],
    dt: f64,
    t_final: f64,
    method: Method,
) -> Result<Vector> {
    check_inputs(flow, x0, dt, t_final)?;
    let steps = libm::ceil(t_final / dt - 1e-9).max(1.0) as u64;
    let full = Propagator::new(flow, dt, method).repeated(steps - 1);
    let last = t_final - (steps - 1) as f64 * dt;
    let x = Propagator::new(flow, last, method).apply(&full.apply(x0));
    if !x.is_finite() {
        return Err(Error::IntegrationNonFinite { time: t_final });
    }
    Ok(x)
}

/// Result of [`settle`].
#[derive(Clone, Debug, PartialEq)]
pub struct Settled {
    pub state: Vector,
    pub time: f64,
    /// `‖A x + b‖∞` at the returned state.
    pub rate: f64,
}

/// Advances `flow` with fixed steps of size `dt` until the state moves
/// slower than [`SETTLE_RATE`] per unit time, doubling the horizon each
/// round (1, 1, 2, 4, … steps).
///
/// Fails with [`Error::NoConvergence`] once `max_time` is exceeded.
pub fn settle(
    flow: &LinearFlow,
    x0: &[f64],
    dt: f64,
    method: Method,
    max_time: f64,
) -> Result<Settled> {
    check_inputs(flow, x0, dt, dt)?;
    let mut x = Vector::from(x0);
    let mut time = 0.0;
    let mut prop = Propagator::new(flow, dt, method);
    let mut rounds = 0;
    loop {
        let rate = norm_inf(&flow.rhs(&x));
        if !rate.is_finite() {
            return Err(Error::IntegrationNonFinite { time });
        }
        if rate < SETTLE_RATE {
            return Ok(Settled {
                state: x,
                time,
                rate,
            });
        }
        if time > max_time {
            return Err(Error::NoConvergence {
                iterations: rounds,
                residual: rate,
            });
        }
        x = prop.apply(&x);
        time += prop.steps() as f64 * dt;
        if rounds > 0 {
            prop = prop.doubled();
        }
        rounds += 1;
    }
}
