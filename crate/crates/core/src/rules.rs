//! Rule-file generation: the event-calculus axioms, physics background
//! knowledge, event effects, detection rules per variant, causal rules, and
//! the query-support library, instantiated with concrete thresholds.
//!
//! Threshold variables are never grounded over the integers; each rule is
//! emitted with the calibrated constant in place, so `disp_greater(2500, ...)`
//! atoms exist only for the configured bounds.

use crate::events::Variant;
use crate::physics::Thresholds;
use crate::scene::Dims;

/// The four event-calculus axioms.
pub fn axioms() -> String {
    "\
% event calculus core
holdsAt(F, 0) :- initially(F).
clipped(F, T) :- happens(E, T), terminates(E, F), time(T).
holdsAt(F, T+1) :- happens(E, T), initiates(E, F), not clipped(F, T), time(T).
holdsAt(F, T+1) :- holdsAt(F, T), not clipped(F, T), time(T).
"
    .to_string()
}

/// Physics background knowledge with thresholds inlined.
pub fn physics_rules(th: &Thresholds, dims: Dims) -> String {
    let (pos1, pos2, sq) = match dims {
        Dims::Three => (
            "position(V1, X1, Y1, Z1, T1)",
            "position(V1, X2, Y2, Z2, T2)",
            "(X1 - X2)^2 + (Y1 - Y2)^2 + (Z1 - Z2)^2",
        ),
        Dims::Two => (
            "position(V1, X1, Y1, T1)",
            "position(V1, X2, Y2, T2)",
            "(X1 - X2)^2 + (Y1 - Y2)^2",
        ),
    };
    let (posa, posb, sqd) = match dims {
        Dims::Three => (
            "position(V1, X1, Y1, Z1, T)",
            "position(V2, X2, Y2, Z2, T)",
            "(X1 - X2)^2 + (Y1 - Y2)^2 + (Z1 - Z2)^2",
        ),
        Dims::Two => (
            "position(V1, X1, Y1, T)",
            "position(V2, X2, Y2, T)",
            "(X1 - X2)^2 + (Y1 - Y2)^2",
        ),
    };
    format!(
        "\
% physics background knowledge
displacement(D, V1, T1, T2) :- {pos1}, {pos2}, next_time(T1, T2), D = {sq}.
disp_greater({m}, V1, T1, T2) :- displacement(D2, V1, T1, T2), D2 > {m}.
disp_smaller({s}, V1, T1, T2) :- displacement(D2, V1, T1, T2), D2 <= {s}.
euc_distance({p}, V1, V2, T) :- {posa}, {posb}, {sqd} <= {p}, V1 != V2.
velocity_change({v}, V1, T2) :- displacement(D1, V1, T1, T2), displacement(D2, V1, T2, T3), |D1 - D2| >= {v}.
",
        m = th.d_move,
        s = th.d_stop,
        p = th.d_prox,
        v = th.d_vel,
    )
}

/// Event effects on fluents.
pub fn effect_rules() -> String {
    "\
% event effects
initiates(collision(V1, V2), collided(V1, V2)) :- object(V1), object(V2).
initiates(entry(V), present(V)) :- object(V).
initiates(entry(V), moving(V)) :- object(V).
initiates(move(V), moving(V)) :- object(V).
terminates(stop(V), moving(V)) :- object(V).
terminates(exit(V), moving(V)) :- object(V).
terminates(exit(V), present(V)) :- object(V).
"
    .to_string()
}

/// Initial state: objects on camera at t=0 are present; those whose first
/// displacement already exceeds the move bound start out moving.
pub fn initial_state_rules(th: &Thresholds) -> String {
    format!(
        "\
% initial state
initially(present(V)) :- on_camera(V, 0).
initially(moving(V)) :- disp_greater({m}, V, 0, 1).
",
        m = th.d_move
    )
}

/// Event-detection rules for a variant. The collision head uses the
/// canonical participant order (V1 < V2); `euc_distance` holds for both
/// orderings so no instance is lost.
pub fn detection_rules(variant: Variant, th: &Thresholds) -> String {
    let mut out = String::from("% event detection\n");
    let entry_w = variant.entry_window(th);
    let move_w = variant.move_window(th);
    // entry
    if entry_w == 1 {
        out.push_str(
            "happens(entry(V1), T1) :- not on_camera(V1, T1), on_camera(V1, T2), next_time(T1, T2).\n",
        );
    } else {
        out.push_str(
            "happens(entry(V1), T1) :- not on_camera(V1, T1), on_camera(V1, T2), on_camera(V1, T3), next_time(T1, T2), next_time(T2, T3).\n",
        );
    }
    // exit
    out.push_str(
        "happens(exit(V1), T1) :- on_camera(V1, T1), not on_camera(V1, T2), next_time(T1, T2).\n",
    );
    // move
    if move_w == 1 {
        out.push_str(&format!(
            "happens(move(V1), T1) :- disp_greater({m}, V1, T1, T2), next_time(T1, T2), not holdsAt(moving(V1), T1).\n",
            m = th.d_move
        ));
    } else {
        out.push_str(&format!(
            "happens(move(V1), T1) :- disp_greater({m}, V1, T1, T2), disp_greater({m}, V1, T2, T3), next_time(T1, T2), next_time(T2, T3), not holdsAt(moving(V1), T1).\n",
            m = th.d_move
        ));
    }
    // stop
    out.push_str(&format!(
        "happens(stop(V1), T1) :- disp_smaller({s}, V1, T1, T2), next_time(T1, T2), holdsAt(moving(V1), T1).\n",
        s = th.d_stop
    ));
    // collision
    out.push_str(&format!(
        "happens(collision(V1, V2), T) :- euc_distance({p}, V1, V2, T), velocity_change({v}, V1, T), velocity_change({v}, V2, T), V1 < V2, not holdsAt(collided(V1, V2), T).\n",
        p = th.d_prox,
        v = th.d_vel
    ));
    out
}

/// Causal reasoning: objects are related to their events, events sharing a
/// participant are related, causes run strictly forward in time, and the
/// relation closes transitively. Event nodes carry their time so that
/// repeated events of the same shape stay distinct.
pub fn causal_rules() -> String {
    "\
% causal reasoning
related(object(V1), event(entry(V1), T)) :- happens(entry(V1), T).
related(object(V1), event(exit(V1), T)) :- happens(exit(V1), T).
related(object(V1), event(move(V1), T)) :- happens(move(V1), T).
related(object(V1), event(stop(V1), T)) :- happens(stop(V1), T).
related(object(V1), event(collision(V1, V2), T)) :- happens(collision(V1, V2), T).
related(object(V2), event(collision(V1, V2), T)) :- happens(collision(V1, V2), T).
related(event(E1, T1), event(E2, T2)) :- related(object(V), event(E1, T1)), related(object(V), event(E2, T2)).
cause(object(V1), event(E1, T1)) :- related(object(V1), event(E1, T1)).
cause(event(E1, T1), event(E2, T2)) :- happens(E1, T1), happens(E2, T2), related(event(E1, T1), event(E2, T2)), T1 < T2.
cause(V1, V2) :- cause(V1, V3), cause(V3, V2).
"
    .to_string()
}

/// Query-support predicates: video end, first entry and last exit per
/// object, and order-insensitive collision lookup.
pub fn support_rules() -> String {
    "\
% query support
ex_next(T1) :- next_time(T1, T2).
end_time(T) :- time(T), not ex_next(T).
earlier_entry(V, T) :- happens(entry(V), T), happens(entry(V), T2), T2 < T.
first_entry(V, T) :- happens(entry(V), T), not earlier_entry(V, T).
later_exit(V, T) :- happens(exit(V), T), happens(exit(V), T2), T2 > T.
last_exit(V, T) :- happens(exit(V), T), not later_exit(V, T).
collides(V1, V2, T) :- happens(collision(V1, V2), T).
collides(V2, V1, T) :- happens(collision(V1, V2), T).
"
    .to_string()
}

/// The complete program for one variant, thresholds, and dimensionality.
pub fn full_program(variant: Variant, th: &Thresholds, dims: Dims) -> String {
    let mut out = String::new();
    out.push_str(&axioms());
    out.push('\n');
    out.push_str(&physics_rules(th, dims));
    out.push('\n');
    out.push_str(&effect_rules());
    out.push('\n');
    out.push_str(&initial_state_rules(th));
    out.push('\n');
    out.push_str(&detection_rules(variant, th));
    out.push('\n');
    out.push_str(&causal_rules());
    out.push('\n');
    out.push_str(&support_rules());
    out
}

/// Every numbered rule of the formulation (axioms, physics, causal, and all
/// detection rules including both noise-robust updates), for reference and
/// for the parser's rule-count check.
pub fn all_numbered_rules(th: &Thresholds, dims: Dims) -> String {
    let mut out = String::new();
    out.push_str(&axioms());
    out.push_str(&physics_rules(th, dims));
    out.push_str(&causal_rules_numbered_only());
    out.push_str(&detection_rules(Variant::H0, th));
    // The two updated detection rules (entry and move with persistence 2).
    let th2 = Thresholds {
        persistence_window: 2,
        ..*th
    };
    out.push_str(
        "happens(entry(V1), T1) :- not on_camera(V1, T1), on_camera(V1, T2), on_camera(V1, T3), next_time(T1, T2), next_time(T2, T3).\n",
    );
    out.push_str(&format!(
        "happens(move(V1), T1) :- disp_greater({m}, V1, T1, T2), disp_greater({m}, V1, T2, T3), next_time(T1, T2), next_time(T2, T3), not holdsAt(moving(V1), T1).\n",
        m = th2.d_move
    ));
    out
}

fn causal_rules_numbered_only() -> String {
    "\
cause(object(V1), event(E1, T1)) :- related(object(V1), event(E1, T1)).
cause(event(E1, T1), event(E2, T2)) :- happens(E1, T1), happens(E2, T2), related(event(E1, T1), event(E2, T2)), T1 < T2.
cause(V1, V2) :- cause(V1, V3), cause(V3, V2).
"
    .to_string()
}
