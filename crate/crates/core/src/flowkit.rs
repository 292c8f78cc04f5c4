//! Dormand–Prince 5(4) integration with dense output and event location,
//! first-hit maps onto velocity level sets, and symmetry checks.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::polyfield::{PolyVectorField, TriPolynomial};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;
pub const DEFAULT_R_ESCAPE: f64 = 1e3;
/// Tolerated excursion into the wrong velocity half-space during `first_hit`.
pub const HALF_SPACE_SLACK: f64 = 1e-7;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Debug)]
pub struct IntegrationOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub r_escape: f64,
    /// Forces constant steps of this size (no error control).
    pub fixed_step: Option<f64>,
    pub max_step: Option<f64>,
    /// When set, consecutive steps whose combined displacement stays below
    /// `thin · (1 + ‖s‖)` are stored as one cubic Hermite segment. Keeps
    /// stiff stretches from storing millions of nodes.
    pub thin: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_steps: DEFAULT_MAX_STEPS,
            r_escape: DEFAULT_R_ESCAPE,
            fixed_step: None,
            max_step: None,
            thin: None,
        }
    }
}

/// Sign-change filter, relative to the direction of integration progress.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Crossing {
    Any,
    Rising,
    Falling,
}

pub struct EventSpec<'a> {
    pub id: String,
    pub g: Box<dyn Fn(&Vec3) -> f64 + 'a>,
    pub crossing: Crossing,
    pub terminal: bool,
    /// Values with |g| at or below `band` do not change the reference sign.
    pub band: f64,
}

impl<'a> EventSpec<'a> {
    pub fn new(id: impl Into<String>, g: impl Fn(&Vec3) -> f64 + 'a) -> Self {
        Self { id: id.into(), g: Box::new(g), crossing: Crossing::Any, terminal: true, band: 0.0 }
    }

    pub fn crossing(mut self, c: Crossing) -> Self {
        self.crossing = c;
        self
    }

    pub fn non_terminal(mut self) -> Self {
        self.terminal = false;
        self
    }

    pub fn band(mut self, band: f64) -> Self {
        self.band = band;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Termination {
    TEnd,
    Event(String),
    Escape,
    StiffFailure(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: String,
    pub t: f64,
    pub point: Vec3,
}

/// Continuous extension of one accepted step.
#[derive(Clone, Debug)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    r: [Vec3; 5],
}

impl DenseSegment {
    pub fn eval_theta(&self, th: f64) -> Vec3 {
        let th1 = 1.0 - th;
        self.r[0] + (self.r[1] + (self.r[2] + (self.r[3] + self.r[4] * th1) * th) * th1) * th
    }

    pub fn eval(&self, t: f64) -> Vec3 {
        self.eval_theta((t - self.t0) / self.h)
    }

    /// Same curve run from its end back to its start, with time origin moved
    /// by `shift`.
    fn reversed(&self, shift: f64) -> DenseSegment {
        let r = &self.r;
        DenseSegment {
            t0: self.t0 + self.h - shift,
            h: -self.h,
            r: [r[0] + r[1], -r[1], r[2] + r[3], -r[3], r[4]],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub s: Vec<Vec3>,
    pub segments: Vec<DenseSegment>,
    pub termination: Termination,
    pub events: Vec<EventRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last_point(&self) -> Vec3 {
        *self.s.last().expect("trajectory has at least one node")
    }

    pub fn last_time(&self) -> f64 {
        *self.t.last().expect("trajectory has at least one node")
    }

    pub fn is_forward(&self) -> bool {
        self.t.len() < 2 || self.t[1] > self.t[0]
    }

    /// State at time `t` from the dense output; clamps to the covered range.
    pub fn at(&self, t: f64) -> Vec3 {
        if self.segments.is_empty() {
            return self.s[0];
        }
        let fwd = self.is_forward();
        let key = |seg: &DenseSegment| if fwd { seg.t0 } else { -seg.t0 };
        let tk = if fwd { t } else { -t };
        let idx = self.segments.partition_point(|seg| key(seg) <= tk).saturating_sub(1);
        let seg = &self.segments[idx];
        let th = ((t - seg.t0) / seg.h).clamp(0.0, 1.0);
        let end = self.last_time();
        if (fwd && t >= end) || (!fwd && t <= end) {
            return self.last_point();
        }
        seg.eval_theta(th)
    }

    /// Nodes plus `per_step - 1` interior dense-output samples per step.
    pub fn dense_samples(&self, per_step: usize) -> Vec<(f64, Vec3)> {
        let mut out = Vec::with_capacity(self.len() * per_step.max(1));
        for k in 0..self.len() {
            out.push((self.t[k], self.s[k]));
            if k + 1 < self.len() {
                let seg = &self.segments[k];
                for m in 1..per_step {
                    let t = self.t[k] + (self.t[k + 1] - self.t[k]) * m as f64 / per_step as f64;
                    out.push((t, seg.eval(t)));
                }
            }
        }
        out
    }

    /// The path traversed in the opposite order, re-timed so the new first
    /// node sits at `t = 0`. Events are dropped.
    pub fn reversed(&self) -> Trajectory {
        let end = self.last_time();
        Trajectory {
            t: self.t.iter().rev().map(|t| t - end).collect(),
            s: self.s.iter().rev().copied().collect(),
            segments: self.segments.iter().rev().map(|seg| seg.reversed(end)).collect(),
            termination: self.termination.clone(),
            events: Vec::new(),
        }
    }

    /// Prefix up to the first point where `‖s‖` reaches `r`, located on the
    /// dense output. `None` if the path never gets that far.
    pub fn truncated_at_radius(&self, r: f64) -> Option<Trajectory> {
        let k = (1..self.len()).find(|&k| self.s[k].norm() >= r)?;
        if self.s[0].norm() >= r {
            return None;
        }
        let seg = &self.segments[k - 1];
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if seg.eval_theta(mid).norm() >= r {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t_cut = seg.t0 + hi * seg.h;
        let mut t = self.t[..k].to_vec();
        let mut s = self.s[..k].to_vec();
        t.push(t_cut);
        s.push(seg.eval_theta(hi));
        Some(Trajectory {
            t,
            s,
            segments: self.segments[..k].to_vec(),
            termination: Termination::Escape,
            events: self.events.iter().filter(|e| (e.t - t_cut) * (e.t - self.t[0]) <= 0.0).cloned().collect(),
        })
    }

    /// CSV with header `t,x,y,z,F1,F2,F3`, one row per node, 17 significant digits.
    pub fn write_csv<W: Write>(&self, field: &PolyVectorField, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y,z,F1,F2,F3")?;
        for (t, s) in self.t.iter().zip(&self.s) {
            let f = field.evaluate(s);
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, s.x, s.y, s.z, f.x, f.y, f.z
            )?;
        }
        Ok(())
    }
}

/// Return `Some(reason)` to stop integration after an accepted step.
pub type Observer<'a> = dyn FnMut(f64, &Vec3) -> Option<String> + 'a;

fn err_norm(y0: &Vec3, y1: &Vec3, e: &Vec3, o: &IntegrationOptions) -> f64 {
    let mut acc = 0.0;
    for k in 0..3 {
        let sc = o.abs_tol + o.rel_tol * y0[k].abs().max(y1[k].abs());
        acc += (e[k] / sc).powi(2);
    }
    (acc / 3.0).sqrt()
}

fn initial_step(field: &PolyVectorField, s0: &Vec3, f0: &Vec3, dir: f64, o: &IntegrationOptions) -> f64 {
    let sc = |v: &Vec3| {
        let mut acc = 0.0;
        for k in 0..3 {
            acc += (v[k] / (o.abs_tol + o.rel_tol * s0[k].abs())).powi(2);
        }
        (acc / 3.0).sqrt()
    };
    let d0 = sc(s0);
    let d1 = sc(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let s1 = s0 + f0 * (dir * h0);
    let f1 = field.evaluate(&s1);
    let d2 = sc(&(f1 - f0)) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / m).powf(0.2) };
    (100.0 * h0).min(h1)
}

fn finite(v: &Vec3) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Locates the root of `g` on one dense segment; returns θ in [0, 1].
fn locate(seg: &DenseSegment, g: &dyn Fn(&Vec3) -> f64, g0: f64, g1: f64, t_tol: f64) -> f64 {
    let (mut a, mut b) = (0.0, 1.0);
    let (mut ga, mut gb) = (g0, g1);
    if ga.signum() == gb.signum() {
        return if ga.abs() < gb.abs() { 0.0 } else { 1.0 };
    }
    let th_tol = t_tol / seg.h.abs();
    let mut side = 0i8;
    for _ in 0..200 {
        // Illinois false position with a bisection fallback.
        let mut m = b - gb * (b - a) / (gb - ga);
        if !(m > a && m < b) || (b - a) > 0.5 {
            m = 0.5 * (a + b);
        }
        let p = seg.eval_theta(m);
        let gm = g(&p);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = m;
            gb = gm;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        let scale = 1e-12 * (1.0 + p.norm());
        if (b - a) < th_tol && gm.abs() < scale {
            break;
        }
        if b - a <= f64::EPSILON * 4.0 {
            break;
        }
    }
    let pa = g(&seg.eval_theta(a)).abs();
    let pb = g(&seg.eval_theta(b)).abs();
    if pa <= pb {
        a
    } else {
        b
    }
}

/// Integrates `ṡ = F(s)` over `t_span` (backward when `t_span.1 < t_span.0`).
///
/// An escape event at `‖s‖ = r_escape` with outward motion is always armed.
pub fn integrate(
    field: &PolyVectorField,
    s0: Vec3,
    t_span: (f64, f64),
    opts: &IntegrationOptions,
    events: &[EventSpec<'_>],
) -> Result<Trajectory> {
    integrate_observed(field, s0, t_span, opts, events, &mut |_, _| None)
}

pub fn integrate_observed(
    field: &PolyVectorField,
    s0: Vec3,
    t_span: (f64, f64),
    opts: &IntegrationOptions,
    events: &[EventSpec<'_>],
    observer: &mut Observer<'_>,
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite()) || t1 == t0 {
        return Err(Error::InvalidArgument("t_span must be finite and non-degenerate".into()));
    }
    if !(1e-14..=1e-2).contains(&opts.rel_tol) || !(1e-14..=1e-2).contains(&opts.abs_tol) {
        return Err(Error::InvalidArgument("tolerances must lie in [1e-14, 1e-2]".into()));
    }
    if !finite(&s0) {
        return Err(Error::Integration("non-finite initial state".into()));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let t_tol = 1e-12 * span;
    let r_esc2 = opts.r_escape * opts.r_escape;

    let mut traj = Trajectory { t: vec![t0], s: vec![s0], segments: Vec::new(), termination: Termination::TEnd, events: Vec::new() };
    let mut t = t0;
    let mut y = s0;
    let mut k1 = field.evaluate(&y);
    if !finite(&k1) {
        return Err(Error::Integration("non-finite field value at the initial state".into()));
    }
    let mut h = match opts.fixed_step {
        Some(hf) => hf.abs(),
        None => initial_step(field, &y, &k1, dir, opts),
    };
    if let Some(hm) = opts.max_step {
        h = h.min(hm);
    }
    // Reference signs for each event (None until |g| leaves its band).
    let mut refs: Vec<Option<f64>> = events
        .iter()
        .map(|e| {
            let g = (e.g)(&y);
            (g.abs() > e.band).then(|| g.signum())
        })
        .collect();
    let mut last_g: Vec<f64> = events.iter().map(|e| (e.g)(&y)).collect();
    let mut esc_prev = y.norm_squared() - r_esc2;

    let mut steps = 0usize;
    let mut facmax = 10.0;
    // Segments before this index are never merged (they carry events).
    let mut merge_floor = 0usize;
    loop {
        if steps >= opts.max_steps {
            traj.termination = Termination::StiffFailure(format!("maximum of {} steps reached", opts.max_steps));
            return Ok(traj);
        }
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        let hs = dir * h;
        let k2 = field.evaluate(&(y + k1 * (hs * A21)));
        let k3 = field.evaluate(&(y + (k1 * A31 + k2 * A32) * hs));
        let k4 = field.evaluate(&(y + (k1 * A41 + k2 * A42 + k3 * A43) * hs));
        let k5 = field.evaluate(&(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * hs));
        let y6 = y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * hs;
        let k6 = field.evaluate(&y6);
        let ynew = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * hs;
        let k7 = field.evaluate(&ynew);
        let errv = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * hs;
        let ok_vals = finite(&ynew) && finite(&k7);
        let err = if ok_vals { err_norm(&y, &ynew, &errv, opts) } else { f64::INFINITY };

        let accept = opts.fixed_step.is_some() || err <= 1.0;
        if !accept || !ok_vals {
            if opts.fixed_step.is_some() {
                traj.termination = Termination::StiffFailure(format!("non-finite state at t={t}"));
                return Ok(traj);
            }
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= fac.min(1.0);
            facmax = 1.0;
            if h < 1e-14 * t.abs().max(1.0) {
                traj.termination = Termination::StiffFailure(format!("step size underflow at t={t}"));
                return Ok(traj);
            }
            continue;
        }
        steps += 1;
        let tnew = if last { t1 } else { t + hs };
        let rc1 = y;
        let rc2 = ynew - y;
        let rc3 = k1 * hs - rc2;
        let rc4 = rc2 - k7 * hs - rc3;
        let rc5 = (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * hs;
        let seg = DenseSegment { t0: t, h: tnew - t, r: [rc1, rc2, rc3, rc4, rc5] };

        // Event detection on this step; the earliest terminal event wins.
        let mut fired: Vec<(f64, usize)> = Vec::new();
        for (n, e) in events.iter().enumerate() {
            let g1 = (e.g)(&ynew);
            let g0 = last_g[n];
            if g1.abs() > e.band {
                if let Some(r) = refs[n] {
                    if g1.signum() != r {
                        let rising = g1 > 0.0;
                        let dir_ok = match e.crossing {
                            Crossing::Any => true,
                            Crossing::Rising => rising,
                            Crossing::Falling => !rising,
                        };
                        if dir_ok {
                            let th = locate(&seg, &*e.g, g0, g1, t_tol);
                            fired.push((th, n));
                        }
                    }
                }
                refs[n] = Some(g1.signum());
            }
            last_g[n] = g1;
        }
        let esc_new = ynew.norm_squared() - r_esc2;
        let mut esc_theta = None;
        if esc_prev <= 0.0 && esc_new > 0.0 {
            let gfun = |p: &Vec3| p.norm_squared() - r_esc2;
            esc_theta = Some(locate(&seg, &gfun, esc_prev, esc_new, t_tol));
        }
        esc_prev = esc_new;

        fired.sort_by(|a, b| a.0.total_cmp(&b.0));
        let first_terminal = fired.iter().find(|(_, n)| events[*n].terminal).copied();
        let stop_theta = match (first_terminal, esc_theta) {
            (Some((a, _)), Some(b)) => Some(a.min(b)),
            (Some((a, _)), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        };
        for (th, n) in &fired {
            if stop_theta.map_or(true, |st| *th <= st) {
                let p = seg.eval_theta(*th);
                traj.events.push(EventRecord { id: events[*n].id.clone(), t: seg.t0 + th * seg.h, point: p });
            }
        }
        traj.segments.push(seg);
        if let Some(st) = stop_theta {
            let seg = traj.segments.last().expect("segment just pushed");
            let p = seg.eval_theta(st);
            let te = seg.t0 + st * seg.h;
            traj.t.push(te);
            traj.s.push(p);
            let escape_first = esc_theta.map_or(false, |e| first_terminal.map_or(true, |(a, _)| e < a));
            traj.termination = if escape_first {
                if dir * p.dot(&field.evaluate(&p)) > 0.0 {
                    Termination::Escape
                } else {
                    Termination::StiffFailure("escape radius crossed without outward motion".into())
                }
            } else {
                let (_, n) = first_terminal.expect("terminal event present");
                Termination::Event(events[n].id.clone())
            };
            return Ok(traj);
        }
        if !fired.is_empty() {
            merge_floor = traj.segments.len();
        }
        let n = traj.segments.len();
        let merge = opts.thin.is_some_and(|thin| {
            n >= 2 && n - 2 >= merge_floor && (ynew - traj.s[n - 2]).norm() < thin * (1.0 + ynew.norm())
        });
        if merge {
            traj.segments.pop();
            let (ta, ya) = (traj.t[n - 2], traj.s[n - 2]);
            traj.segments[n - 2] = hermite_segment(ta, ya, field.evaluate(&ya), tnew, ynew, k7);
            *traj.t.last_mut().expect("node") = tnew;
            *traj.s.last_mut().expect("node") = ynew;
        } else {
            traj.t.push(tnew);
            traj.s.push(ynew);
        }
        if let Some(reason) = observer(tnew, &ynew) {
            traj.termination = Termination::Event(reason);
            return Ok(traj);
        }
        if last {
            traj.termination = Termination::TEnd;
            return Ok(traj);
        }
        t = tnew;
        y = ynew;
        k1 = k7;
        if opts.fixed_step.is_none() {
            let fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 10.0 };
            h *= fac.clamp(0.2, facmax);
            facmax = 10.0;
            if let Some(hm) = opts.max_step {
                h = h.min(hm);
            }
        }
    }
}

/// Cubic Hermite interpolant in the dense-output basis (last coefficient zero).
fn hermite_segment(t0: f64, y0: Vec3, f0: Vec3, t1: f64, y1: Vec3, f1: Vec3) -> DenseSegment {
    let h = t1 - t0;
    let r1 = y1 - y0;
    let r2 = f0 * h - r1;
    let r3 = r1 - f1 * h - r2;
    DenseSegment { t0, h, r: [y0, r1, r2, r3, Vec3::zeros()] }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeDirection {
    Forward,
    Backward,
}

impl TimeDirection {
    pub fn sign(self) -> f64 {
        match self {
            TimeDirection::Forward => 1.0,
            TimeDirection::Backward => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitTarget {
    HMinus,
    HPlus,
    HalfPlaneH1,
    NoneEscaped,
    NoneMaxtime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub start: Vec3,
    pub hit_point: Vec3,
    /// Elapsed time |t| until the hit (or until the run ended).
    pub hit_time: f64,
    pub target: HitTarget,
    /// Sign σ of the second Lie derivative at the start: the trajectory
    /// leaves into `{σ F_i > 0}`.
    pub side: i8,
    /// Smallest value of `σ F_i` seen before the hit.
    pub min_side_value: f64,
}

pub const DEFAULT_FIRST_HIT_TMAX: f64 = 1e3;

/// First-hit map from a tangency point: follows the trajectory in `direction`
/// until it returns to `H = {F_i = 0}` or crosses the plane `{s_i = x1_coord}`
/// while `σ F_i > 0`, whichever comes first. `i` is 1-based.
pub fn first_hit(
    field: &PolyVectorField,
    i: usize,
    s0: Vec3,
    x1_coord: f64,
    direction: TimeDirection,
) -> Result<HitRecord> {
    first_hit_with(field, i, s0, x1_coord, direction, DEFAULT_FIRST_HIT_TMAX, &IntegrationOptions::default())
}

pub fn first_hit_with(
    field: &PolyVectorField,
    i: usize,
    s0: Vec3,
    x1_coord: f64,
    direction: TimeDirection,
    t_max: f64,
    opts: &IntegrationOptions,
) -> Result<HitRecord> {
    check_component(i)?;
    let k = i - 1;
    let fi = field.component(k).clone();
    let f0 = field.evaluate(&s0);
    if f0.norm() < 1e-12 * (1.0 + s0.norm()) {
        return Err(Error::FixedPoint(format!("{s0:?}")));
    }
    let l = field.lie_derivative(&fi);
    let l2 = field.lie_derivative(&l);
    let tol = 1e-9 * (1.0 + s0.norm());
    if fi.eval(&s0).abs() > tol || l.eval(&s0).abs() > tol {
        return Err(Error::NotOnLevelSet(format!("{s0:?} is not on the tangency curve")));
    }
    let l2v = l2.eval(&s0);
    if l2v.abs() <= tol {
        return Err(Error::Degenerate(format!("second Lie derivative vanishes at {s0:?}")));
    }
    let sigma = l2v.signum();
    let fi_ref = &fi;
    let events = [
        EventSpec::new("H", move |p: &Vec3| sigma * fi_ref.eval(p)).crossing(Crossing::Falling).band(1e-13),
        EventSpec::new("H1", move |p: &Vec3| p[k] - x1_coord).crossing(Crossing::Any),
    ];
    let mut min_side = f64::INFINITY;
    let mut violation: Option<Vec3> = None;
    let mut obs = |_t: f64, p: &Vec3| {
        let v = sigma * fi_ref.eval(p);
        min_side = min_side.min(v);
        if v < -HALF_SPACE_SLACK && violation.is_none() {
            violation = Some(*p);
            return Some("half-space violation".to_string());
        }
        None
    };
    let dir = direction.sign();
    let mut traj = integrate_observed(field, s0, (0.0, dir * t_max), opts, &events, &mut obs)?;
    // The plane event only counts while σF_i > 0; otherwise keep going.
    let mut elapsed = 0.0;
    loop {
        match &traj.termination {
            Termination::Event(id) if id == "H1" => {
                let p = traj.last_point();
                if sigma * fi.eval(&p) > 0.0 {
                    break;
                }
                elapsed += traj.last_time().abs();
                let rest = t_max - elapsed;
                if rest <= 0.0 {
                    break;
                }
                let ev = [
                    EventSpec::new("H", move |p: &Vec3| sigma * fi_ref.eval(p)).crossing(Crossing::Falling).band(1e-13),
                    EventSpec::new("H1", move |p: &Vec3| p[k] - x1_coord).crossing(Crossing::Any).band(1e-12),
                ];
                traj = integrate_observed(field, p, (0.0, dir * rest), opts, &ev, &mut obs)?;
            }
            _ => break,
        }
    }
    if let Some(p) = violation {
        return Err(Error::Integration(format!(
            "trajectory left the half-space sigma*F_{i} >= -{HALF_SPACE_SLACK:e} at {p:?}"
        )));
    }
    let total = elapsed + traj.last_time().abs();
    let hit_point = traj.last_point();
    let target = match &traj.termination {
        Termination::Event(id) if id == "H" => {
            if total < 1e-8 {
                return Err(Error::Degenerate(format!("immediate re-tangency at {s0:?}")));
            }
            // Physical-time crossing class at the hit point.
            match (l.eval(&hit_point) * dir).signum() as i8 {
                1 => HitTarget::HPlus,
                _ => HitTarget::HMinus,
            }
        }
        Termination::Event(id) if id == "H1" => HitTarget::HalfPlaneH1,
        Termination::Escape => HitTarget::NoneEscaped,
        Termination::TEnd => HitTarget::NoneMaxtime,
        Termination::Event(other) => return Err(Error::Integration(format!("unexpected stop: {other}"))),
        Termination::StiffFailure(msg) => return Err(Error::Integration(msg.clone())),
    };
    Ok(HitRecord { start: s0, hit_point, hit_time: total, target, side: sigma as i8, min_side_value: min_side })
}

pub(crate) fn check_component(i: usize) -> Result<()> {
    if (1..=3).contains(&i) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("component index must be 1, 2 or 3, got {i}")))
    }
}

/// Signed coordinate permutation `σ(s)_k = signs[k] · s[perm[k]]` together
/// with the time sign it pairs with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Involution {
    pub perm: [usize; 3],
    pub signs: [f64; 3],
    pub time_sign: f64,
}

impl Involution {
    pub fn identity() -> Self {
        Self { perm: [0, 1, 2], signs: [1.0; 3], time_sign: 1.0 }
    }

    /// `(x, y, z, t) → (−x, y, −z, −t)`.
    pub fn michelson() -> Self {
        Self { perm: [0, 1, 2], signs: [-1.0, 1.0, -1.0], time_sign: -1.0 }
    }

    pub fn apply(&self, s: &Vec3) -> Vec3 {
        Vec3::new(
            self.signs[0] * s[self.perm[0]],
            self.signs[1] * s[self.perm[1]],
            self.signs[2] * s[self.perm[2]],
        )
    }
}

/// `max_t ‖φ_t(s0) − σ(φ_{τt}(σ(s0)))‖` over 201 samples of `[0, T]`, where τ
/// is the involution's time sign. Zero for an exact symmetry.
pub fn symmetry_deviation(field: &PolyVectorField, inv: &Involution, s0: Vec3, t_final: f64) -> Result<f64> {
    if !(t_final > 0.0) {
        return Err(Error::InvalidArgument("T must be positive".into()));
    }
    let opts = IntegrationOptions::default();
    let a = integrate(field, s0, (0.0, t_final), &opts, &[])?;
    let b = integrate(field, inv.apply(&s0), (0.0, inv.time_sign * t_final), &opts, &[])?;
    for tr in [&a, &b] {
        if let Termination::StiffFailure(m) = &tr.termination {
            return Err(Error::Integration(m.clone()));
        }
    }
    let common = a.last_time().abs().min(b.last_time().abs());
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let t = common * k as f64 / 200.0;
        let d = a.at(t) - inv.apply(&b.at(inv.time_sign * t));
        worst = worst.max(d.norm());
    }
    Ok(worst)
}

/// Helper used by several modules: the value of `F_i` along a polynomial.
pub(crate) fn poly_event<'a>(id: &str, p: &'a TriPolynomial) -> EventSpec<'a> {
    EventSpec::new(id, move |s: &Vec3| p.eval(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat3;
    use crate::polyfield::{parse_system, zoo, SystemId};
    use std::collections::BTreeMap;

    fn michelson(c: f64) -> PolyVectorField {
        let mut p = BTreeMap::new();
        p.insert("c".to_string(), c);
        zoo(SystemId::Michelson, &p).unwrap()
    }

    #[test]
    fn linear_decay() {
        let f = PolyVectorField::linear("decay", &(-Mat3::identity()));
        let tr = integrate(&f, Vec3::new(1.0, 0.0, 0.0), (0.0, 1.0), &IntegrationOptions::default(), &[]).unwrap();
        assert_eq!(tr.termination, Termination::TEnd);
        assert!((tr.last_point().x - (-1f64).exp()).abs() < 1e-9);
        assert!(tr.t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn backward_times_decrease() {
        let f = PolyVectorField::linear("decay", &(-Mat3::identity()));
        let tr = integrate(&f, Vec3::new(1.0, 0.0, 0.0), (0.0, -1.0), &IntegrationOptions::default(), &[]).unwrap();
        assert!(tr.t.windows(2).all(|w| w[1] < w[0]));
        assert!((tr.last_point().x - 1f64.exp()).abs() < 1e-8);
        assert!((tr.at(-0.5).x - 0.5f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn reversal_and_truncation() {
        let f = michelson(1.0);
        let tr = integrate(&f, Vec3::new(0.3, 0.1, -0.2), (0.0, 5.0), &IntegrationOptions::default(), &[]).unwrap();
        let rv = tr.reversed();
        assert_eq!(rv.t[0], 0.0);
        assert!((rv.last_time() + tr.last_time()).abs() < 1e-12);
        for k in 1..20 {
            let t = tr.last_time() * k as f64 / 20.0;
            assert!((rv.at(t - tr.last_time()) - tr.at(t)).norm() < 1e-12);
        }
        let r = 0.5 * (tr.s[0].norm() + tr.s.iter().map(|s| s.norm()).fold(0.0, f64::max));
        let cut = tr.truncated_at_radius(r).unwrap();
        assert!((cut.last_point().norm() - r).abs() < 1e-9);
        assert!(cut.s[..cut.len() - 1].iter().all(|s| s.norm() < r));
        assert!((cut.at(cut.last_time()) - cut.last_point()).norm() < 1e-12);
    }

    #[test]
    fn zero_field_is_constant() {
        let f = parse_system("dx=0\ndy=0\ndz=0").unwrap();
        let s0 = Vec3::new(1.0, 2.0, 3.0);
        let tr = integrate(&f, s0, (0.0, 10.0), &IntegrationOptions::default(), &[]).unwrap();
        assert_eq!(tr.termination, Termination::TEnd);
        assert!(tr.s.iter().all(|s| *s == s0));
    }

    #[test]
    fn michelson_y_event() {
        let f = michelson(1.0);
        let ev = [poly_event("y", f.component(0))];
        let tr = integrate(&f, Vec3::new(0.0, 0.1, 0.0), (0.0, 50.0), &IntegrationOptions::default(), &ev).unwrap();
        assert_eq!(tr.termination, Termination::Event("y".into()));
        let rec = &tr.events[0];
        assert!(rec.point.y.abs() < 1e-10);
        assert!(rec.t > 0.0);
    }

    #[test]
    fn escape_is_detected() {
        let f = PolyVectorField::linear("grow", &Mat3::identity());
        let tr = integrate(&f, Vec3::new(1.0, 0.0, 0.0), (0.0, 100.0), &IntegrationOptions::default(), &[]).unwrap();
        assert_eq!(tr.termination, Termination::Escape);
        assert!((tr.last_point().norm() - 1e3).abs() < 1e-6);
        assert!((tr.last_time() - 1e3f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn bad_arguments() {
        let f = michelson(1.0);
        let o = IntegrationOptions::default();
        assert!(integrate(&f, Vec3::zeros(), (1.0, 1.0), &o, &[]).is_err());
        assert!(integrate(&f, Vec3::new(f64::NAN, 0.0, 0.0), (0.0, 1.0), &o, &[]).is_err());
        let loose = IntegrationOptions { rel_tol: 0.5, ..Default::default() };
        assert!(integrate(&f, Vec3::zeros(), (0.0, 1.0), &loose, &[]).is_err());
    }

    #[test]
    fn finite_time_blowup_reports_escape() {
        let f = parse_system("dx=x^2\ndy=0\ndz=0").unwrap();
        let tr = integrate(&f, Vec3::new(1.0, 0.0, 0.0), (0.0, 2.0), &IntegrationOptions::default(), &[]).unwrap();
        assert_eq!(tr.termination, Termination::Escape);
    }

    #[test]
    fn identity_symmetry_is_exact() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        let d = symmetry_deviation(&f, &Involution::identity(), Vec3::new(0.1, 0.2, 0.3), 3.0).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn michelson_reversible() {
        let f = michelson(1.0);
        let d = symmetry_deviation(&f, &Involution::michelson(), Vec3::new(0.3, 0.2, -0.1), 5.0).unwrap();
        assert!(d < 1e-7, "{d}");
    }

    #[test]
    fn bz_not_reversible() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        let d = symmetry_deviation(&f, &Involution::michelson(), Vec3::new(0.3, 0.2, -0.1), 5.0).unwrap();
        assert!(d > 1e-2, "{d}");
    }

    #[test]
    fn csv_export() {
        let f = michelson(1.0);
        let tr = integrate(&f, Vec3::new(0.0, 0.1, 0.0), (0.0, 1.0), &IntegrationOptions::default(), &[]).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,y,z,F1,F2,F3"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row.len(), 7);
        assert_eq!(row[2], 0.1);
        assert_eq!(text.lines().count(), tr.len() + 1);
    }

    #[test]
    fn first_hit_rejects_fixed_point() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        assert!(matches!(
            first_hit(&f, 1, Vec3::new(-1.0, 0.0, 0.0), -1.0, TimeDirection::Forward),
            Err(Error::FixedPoint(_))
        ));
    }

    #[test]
    fn first_hit_bz_between_fixed_points() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        let rec = first_hit(&f, 1, Vec3::new(-0.5, 0.0, 0.0), -1.0, TimeDirection::Forward).unwrap();
        assert_eq!(rec.side, -1);
        assert!(matches!(rec.target, HitTarget::HPlus | HitTarget::HalfPlaneH1 | HitTarget::HMinus));
        assert!(rec.min_side_value >= -HALF_SPACE_SLACK);
        match rec.target {
            HitTarget::HalfPlaneH1 => assert!((rec.hit_point.x + 1.0).abs() < 1e-9),
            _ => assert!(rec.hit_point.y.abs() < 1e-9),
        }
    }

    #[test]
    fn first_hit_michelson() {
        let f = michelson(1.0);
        let rec = first_hit(&f, 1, Vec3::new(2.0, 0.0, 0.0), -2f64.sqrt(), TimeDirection::Forward).unwrap();
        assert_eq!(rec.side, -1);
        assert!(rec.min_side_value >= -HALF_SPACE_SLACK);
        assert!(rec.hit_time > 0.0);
    }
}
