//! Kinematic background knowledge, materialized as ground atoms.
//!
//! Works on squared displacements and squared distances throughout: no
//! square root is ever taken, keeping the arithmetic exact over integers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::facts::FactBase;
use crate::logic::{Atom, Sym, Term};
use crate::scene::ObjId;

/// Calibrated rule thresholds, in quantized units squared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    /// Squared-displacement lower bound for the move event.
    pub d_move: i64,
    /// Squared-displacement upper bound for the stop event.
    pub d_stop: i64,
    /// Squared-distance bound for the collision proximity test.
    pub d_prox: i64,
    /// Velocity-change lower bound for the collision test.
    pub d_vel: i64,
    /// Consecutive-frame persistence required by the noise-robust entry and
    /// move rules (1 or 2).
    pub persistence_window: u8,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            d_move: 2500,
            d_stop: 400,
            d_prox: 90_000,
            d_vel: 2500,
            persistence_window: 2,
        }
    }
}

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("object {id} not on camera at t={t} (absence, not zero displacement)")]
    NotPresent { id: ObjId, t: i64 },
    #[error("next_time({t1},{t2}) does not hold")]
    NotConsecutive { t1: i64, t2: i64 },
    #[error("bad thresholds line {line}: {msg}")]
    BadThresholdsLine { line: usize, msg: String },
    #[error("missing threshold key `{0}`")]
    MissingKey(&'static str),
}

impl Thresholds {
    /// Warnings for admissible but suspicious configurations.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.d_stop > self.d_move {
            out.push(format!(
                "d_stop ({}) exceeds d_move ({}); move/stop events may flap without hysteresis",
                self.d_stop, self.d_move
            ));
        }
        out
    }

    /// Key-value text form, one `key = value` per line.
    pub fn to_text(&self) -> String {
        format!(
            "d_move = {}\nd_stop = {}\nd_prox = {}\nd_vel = {}\npersistence_window = {}\n",
            self.d_move, self.d_stop, self.d_prox, self.d_vel, self.persistence_window
        )
    }
}

impl fmt::Display for Thresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d_move={} d_stop={} d_prox={} d_vel={} pw={}",
            self.d_move, self.d_stop, self.d_prox, self.d_vel, self.persistence_window
        )
    }
}

impl FromStr for Thresholds {
    type Err = PhysicsError;

    fn from_str(text: &str) -> Result<Self, PhysicsError> {
        let mut map: BTreeMap<&str, i64> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, '=');
            let key = parts.next().unwrap_or("").trim();
            let value = parts
                .next()
                .ok_or_else(|| PhysicsError::BadThresholdsLine {
                    line: i + 1,
                    msg: "expected `key = value`".into(),
                })?
                .trim();
            let value: i64 = value.parse().map_err(|_| PhysicsError::BadThresholdsLine {
                line: i + 1,
                msg: format!("`{value}` is not an integer"),
            })?;
            if value < 0 {
                return Err(PhysicsError::BadThresholdsLine {
                    line: i + 1,
                    msg: "thresholds are nonnegative".into(),
                });
            }
            map.insert(
                match key {
                    "d_move" => "d_move",
                    "d_stop" => "d_stop",
                    "d_prox" => "d_prox",
                    "d_vel" => "d_vel",
                    "persistence_window" => "persistence_window",
                    other => {
                        return Err(PhysicsError::BadThresholdsLine {
                            line: i + 1,
                            msg: format!("unknown key `{other}`"),
                        })
                    }
                },
                value,
            );
        }
        let get = |k: &'static str| map.get(k).copied().ok_or(PhysicsError::MissingKey(k));
        let pw = map.get("persistence_window").copied().unwrap_or(2);
        if !(1..=2).contains(&pw) {
            return Err(PhysicsError::BadThresholdsLine {
                line: 0,
                msg: "persistence_window must be 1 or 2".into(),
            });
        }
        Ok(Thresholds {
            d_move: get("d_move")?,
            d_stop: get("d_stop")?,
            d_prox: get("d_prox")?,
            d_vel: get("d_vel")?,
            persistence_window: pw as u8,
        })
    }
}

/// Positions and derived displacement tables for one scene, precomputed once
/// and shared across threshold choices during calibration.
#[derive(Clone, Debug)]
pub struct Kinematics {
    pub horizon: usize,
    pub objects: Vec<ObjId>,
    /// Quantized position per object per frame; `None` when off camera.
    /// z is 0 in 2D mode.
    pos: BTreeMap<ObjId, Vec<Option<[i64; 3]>>>,
    /// Squared displacement over `[t, t+1]`, when present at both frames.
    disp: BTreeMap<ObjId, Vec<Option<i64>>>,
    /// |disp[t-1] - disp[t]|: absolute change of squared displacement at t.
    vel_change: BTreeMap<ObjId, Vec<Option<i64>>>,
}

impl Kinematics {
    pub fn from_facts(fb: &FactBase) -> Kinematics {
        let n = fb.time_horizon;
        let mut pos: BTreeMap<ObjId, Vec<Option<[i64; 3]>>> = BTreeMap::new();
        let dims = fb.dims.arity();
        for atom in fb.atoms_of(Sym::new("position")) {
            let id = ObjId(atom.args[0].as_int().expect("object id"));
            let t = atom.args[dims + 1].as_int().expect("time") as usize;
            let mut xyz = [0i64; 3];
            for (k, slot) in xyz.iter_mut().enumerate().take(dims) {
                *slot = atom.args[k + 1].as_int().expect("coordinate");
            }
            pos.entry(id).or_insert_with(|| vec![None; n])[t] = Some(xyz);
        }
        let mut disp = BTreeMap::new();
        let mut vel_change = BTreeMap::new();
        for (&id, track) in &pos {
            let mut d: Vec<Option<i64>> = vec![None; n.saturating_sub(1)];
            for t in 0..n.saturating_sub(1) {
                if let (Some(a), Some(b)) = (track[t], track[t + 1]) {
                    d[t] = Some(sq_dist(a, b));
                }
            }
            let mut vc: Vec<Option<i64>> = vec![None; n];
            for t in 1..n.saturating_sub(1) {
                if let (Some(d1), Some(d2)) = (d[t - 1], d[t]) {
                    vc[t] = Some((d1 - d2).abs());
                }
            }
            disp.insert(id, d);
            vel_change.insert(id, vc);
        }
        Kinematics {
            horizon: n,
            objects: pos.keys().copied().collect(),
            pos,
            disp,
            vel_change,
        }
    }

    pub fn position(&self, id: ObjId, t: usize) -> Option<[i64; 3]> {
        self.pos.get(&id).and_then(|v| v.get(t).copied().flatten())
    }

    pub fn on_camera(&self, id: ObjId, t: usize) -> bool {
        self.position(id, t).is_some()
    }

    /// Squared displacement over `[t, t+1]`.
    pub fn disp(&self, id: ObjId, t: usize) -> Option<i64> {
        self.disp.get(&id).and_then(|v| v.get(t).copied().flatten())
    }

    /// |disp(t-1) - disp(t)|.
    pub fn vel_change(&self, id: ObjId, t: usize) -> Option<i64> {
        self.vel_change
            .get(&id)
            .and_then(|v| v.get(t).copied().flatten())
    }

    pub fn sq_distance(&self, a: ObjId, b: ObjId, t: usize) -> Option<i64> {
        Some(sq_dist(self.position(a, t)?, self.position(b, t)?))
    }
}

fn sq_dist(a: [i64; 3], b: [i64; 3]) -> i64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Squared displacement of `v` between consecutive frames `t1`, `t2`.
/// Absence at either frame is an error, distinguished from zero displacement.
pub fn displacement(fb: &FactBase, v: ObjId, t1: i64, t2: i64) -> Result<i64, PhysicsError> {
    if t2 != t1 + 1 || t1 < 0 || t2 >= fb.time_horizon as i64 {
        return Err(PhysicsError::NotConsecutive { t1, t2 });
    }
    let kin = Kinematics::from_facts(fb);
    let a = kin
        .position(v, t1 as usize)
        .ok_or(PhysicsError::NotPresent { id: v, t: t1 })?;
    let b = kin
        .position(v, t2 as usize)
        .ok_or(PhysicsError::NotPresent { id: v, t: t2 })?;
    Ok(sq_dist(a, b))
}

/// Materialize the thresholded kinematic atoms:
/// `disp_greater(d_move, v, t, t+1)`, `disp_smaller(d_stop, v, t, t+1)`,
/// `euc_distance(d_prox, v1, v2, t)` (both orderings),
/// `velocity_change(d_vel, v, t)`.
pub fn materialize_kinematics(fb: &FactBase, th: &Thresholds) -> Vec<Atom> {
    let kin = Kinematics::from_facts(fb);
    materialize(&kin, th)
}

/// Same as [`materialize_kinematics`], against a precomputed table.
pub fn materialize(kin: &Kinematics, th: &Thresholds) -> Vec<Atom> {
    let mut out = Vec::new();
    let n = kin.horizon;
    for &v in &kin.objects {
        for t in 0..n.saturating_sub(1) {
            if let Some(d) = kin.disp(v, t) {
                if d > th.d_move {
                    out.push(Atom::new(
                        "disp_greater",
                        vec![
                            Term::Int(th.d_move),
                            Term::Int(v.0),
                            Term::Int(t as i64),
                            Term::Int(t as i64 + 1),
                        ],
                    ));
                }
                if d <= th.d_stop {
                    out.push(Atom::new(
                        "disp_smaller",
                        vec![
                            Term::Int(th.d_stop),
                            Term::Int(v.0),
                            Term::Int(t as i64),
                            Term::Int(t as i64 + 1),
                        ],
                    ));
                }
            }
        }
        for t in 0..n {
            if let Some(c) = kin.vel_change(v, t) {
                if c >= th.d_vel {
                    out.push(Atom::new(
                        "velocity_change",
                        vec![Term::Int(th.d_vel), Term::Int(v.0), Term::Int(t as i64)],
                    ));
                }
            }
        }
    }
    for (i, &v1) in kin.objects.iter().enumerate() {
        for &v2 in &kin.objects[i + 1..] {
            for t in 0..n {
                if let Some(d) = kin.sq_distance(v1, v2, t) {
                    if d <= th.d_prox {
                        for (a, b) in [(v1, v2), (v2, v1)] {
                            out.push(Atom::new(
                                "euc_distance",
                                vec![
                                    Term::Int(th.d_prox),
                                    Term::Int(a.0),
                                    Term::Int(b.0),
                                    Term::Int(t as i64),
                                ],
                            ));
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}
