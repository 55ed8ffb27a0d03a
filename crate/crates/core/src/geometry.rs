//! Spacetime lines, cones, exact rational line intersection, and the
//! controlled-modification validator that every gadget construction is
//! checked against.
//!
//! The validator re-censuses the diagram before and after a candidate
//! modification in lockstep and checks the six safety conditions
//! semantically; line algebra is only used by callers to prune candidates.

use crate::core_ca::Speed;
use crate::formula;
use crate::logical::{wavefront_separated, LogicalConfiguration, SpacetimePosition};
use std::collections::BTreeSet;
use std::fmt;

/// A spacetime trajectory of fixed speed, normalized by its coordinate at
/// time 0. Two lines are equal iff speed and base agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Line {
    pub speed: Speed,
    pub base: i64,
}

impl Line {
    pub fn new(speed: Speed, base: i64) -> Line {
        Line { speed, base }
    }

    /// The line of the given speed passing through `(coord, time)`.
    pub fn through(coord: i64, time: i64, speed: Speed) -> Line {
        Line { speed, base: coord - speed.value() * time }
    }

    /// Coordinate of the line at a time.
    pub fn at(self, time: i64) -> i64 {
        self.base + self.speed.value() * time
    }

    /// The position of this line at a time.
    pub fn position(self, time: i64) -> SpacetimePosition {
        SpacetimePosition { coord: self.at(time), time, speed: self.speed }
    }

    pub fn mirrored(self) -> Line {
        Line { speed: self.speed.mirrored(), base: -self.base }
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({}, {})", self.base, self.speed)
    }
}

/// The unique line through a spacetime position.
pub fn line_through(position: SpacetimePosition) -> Line {
    Line::through(position.coord, position.time, position.speed)
}

/// Exact rational number, used for intersection points that need not lie on
/// the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "rational with zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Rational { num: sign * num / g, den: sign * den / g }
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Result of intersecting two lines over the rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineIntersection {
    /// Identical lines.
    Same,
    /// Parallel and distinct: no intersection.
    Parallel,
    /// Unique intersection point; it can only be a crossing when both
    /// components are integers.
    At { coord: Rational, time: Rational },
}

/// Unique intersection of two non-parallel lines, exactly.
pub fn intersect(l1: Line, l2: Line) -> LineIntersection {
    if l1.speed.value() == l2.speed.value() {
        return if l1.base == l2.base { LineIntersection::Same } else { LineIntersection::Parallel };
    }
    let ds = l1.speed.value() - l2.speed.value();
    let time = Rational::new(l2.base - l1.base, ds);
    let coord = Rational::new(l1.base * ds + l1.speed.value() * (l2.base - l1.base), ds);
    LineIntersection::At { coord, time }
}

/// The positive cone rooted at `(apex_coordinate, apex_time)`: all spacetime
/// points reachable at speed at most 1 per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cone {
    pub apex_coordinate: i64,
    pub apex_time: i64,
}

impl Cone {
    pub fn new(apex_coordinate: i64, apex_time: i64) -> Cone {
        Cone { apex_coordinate, apex_time }
    }

    pub fn contains(self, coord: i64, time: i64) -> bool {
        time >= self.apex_time && (coord - self.apex_coordinate).abs() <= time - self.apex_time
    }
}

/// Budget and protections for one controlled modification.
#[derive(Debug, Clone, Default)]
pub struct ControlBudget {
    /// Maximum added particles, and maximum new occupied lines.
    pub max_added_particles: usize,
    /// Maximum new crossings.
    pub max_new_crossings: usize,
    /// Protected lines: must not gain particles of their own speed or
    /// collisions.
    pub protected_lines: BTreeSet<Line>,
    /// Target lines: the positions this modification is allowed to feed.
    pub target_lines: BTreeSet<Line>,
    /// Deadline `t` of the modification.
    pub deadline: i64,
    /// Protected interval `I`: at the deadline, no position over `I` outside
    /// the targets may gain a Boolean particle.
    pub protected_interval: Option<(i64, i64)>,
    /// Lines whose particles the modification deliberately manipulates (the
    /// source lines). The scheduled collisions necessarily land on them, so
    /// they are exempt from condition 4 along with the targets.
    pub exempt_lines: BTreeSet<Line>,
}

/// Occupied lines, crossings, collisions and added particles of the diagram
/// of interest, as accumulated by validations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiagramLedger {
    pub occupied_lines: BTreeSet<Line>,
    pub crossings: BTreeSet<(i64, i64)>,
    pub collisions: BTreeSet<(i64, i64)>,
    pub added_particles: Vec<(i64, Speed)>,
}

/// One violated condition, with the first offending location.
#[derive(Debug, Clone)]
pub struct Violation {
    pub condition: u8,
    pub location: Option<(i64, i64)>,
    pub line: Option<Line>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {} violated: {}", self.condition, self.detail)?;
        if let Some((i, t)) = self.location {
            write!(f, " at ({}, {})", i, t)?;
        }
        if let Some(l) = self.line {
            write!(f, " on {}", l)?;
        }
        Ok(())
    }
}

/// Outcome of validating one candidate modification.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub added_particles: usize,
    pub new_occupied_lines: Vec<Line>,
    pub new_crossings: Vec<(i64, i64)>,
    pub new_collisions: Vec<(i64, i64)>,
    pub occupied_after: BTreeSet<Line>,
    pub crossings_after: BTreeSet<(i64, i64)>,
    pub collisions_after: BTreeSet<(i64, i64)>,
    pub window_end: i64,
    pub weak: bool,
}

impl ValidationReport {
    /// Diagnostic text: counts plus every violation.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "controlled modification: {} ({} added, {} new lines, {} new crossings, window [0, {}]{})\n",
            if self.ok { "valid" } else { "INVALID" },
            self.added_particles,
            self.new_occupied_lines.len(),
            self.new_crossings.len(),
            self.window_end,
            if self.weak { ", weak" } else { "" },
        ));
        for v in &self.violations {
            s.push_str(&format!("  {}\n", v));
        }
        s
    }
}

struct Scan {
    occupied: BTreeSet<Line>,
    crossings: BTreeSet<(i64, i64)>,
    collisions: BTreeSet<(i64, i64)>,
}

impl Scan {
    fn new() -> Scan {
        Scan { occupied: BTreeSet::new(), crossings: BTreeSet::new(), collisions: BTreeSet::new() }
    }

    fn absorb(&mut self, t: i64, x: &LogicalConfiguration) {
        for (i, cell) in x.iter() {
            let mut count = 0;
            for (s, _) in cell.particles() {
                count += 1;
                self.occupied.insert(Line::through(i, t, s));
            }
            if count >= 2 {
                self.crossings.insert((i, t));
                // A crossing occupies every line through it.
                for s in Speed::ALL {
                    self.occupied.insert(Line::through(i, t, s));
                }
            }
            if count >= 3 {
                self.collisions.insert((i, t));
            }
        }
    }
}

fn push_violation(violations: &mut Vec<Violation>, v: Violation) {
    if violations.iter().all(|w| w.condition != v.condition) {
        violations.push(v);
    }
}

/// Check the six conditions of a controlled modification by censusing both
/// diagrams over `[0, max(window_end, separation)]` in lockstep.
///
/// `after` must be `before` plus concrete particles added at time 0 only.
/// In weak mode all conditions are enforced only up to the deadline and
/// condition 6 is skipped; in strong mode the scan extends past
/// `window_end` until the wavefront certificate freezes the diagram, so no
/// later event can be missed.
///
/// Condition 4 is enforced as: no protected or previously occupied line
/// (outside the declared target and source lines) gains a Boolean particle
/// of its own speed or a collision on its path. Two-particle meets are
/// inert in this automaton — they provably never change a label — and every
/// aux trajectory unavoidably crosses occupied lines, so an inert crossing
/// on a protected line is not a failure; any actual disturbance of a line
/// shows up as a collision on it.
pub fn validate_controlled(
    before: &LogicalConfiguration,
    after: &LogicalConfiguration,
    budget: &ControlBudget,
    window_end: i64,
    weak: bool,
) -> ValidationReport {
    let deadline = budget.deadline;
    let mut scan_b = Scan::new();
    let mut scan_a = Scan::new();
    let mut violations: Vec<Violation> = Vec::new();

    // Condition 1: number of added particles (time-0 concrete delta).
    let mut added = 0usize;
    for (i, cell) in after.iter() {
        let b = before.get(i);
        for s in Speed::ALL {
            let fa = cell.get(s);
            let fb = b.get(s);
            if fa != fb {
                assert_eq!(fa, formula::TRUE, "modification must only add concrete particles");
                assert_eq!(fb, formula::FALSE, "modification must only add concrete particles");
                added += 1;
            }
        }
    }
    if added > budget.max_added_particles {
        violations.push(Violation {
            condition: 1,
            location: None,
            line: None,
            detail: format!("{} particles added, budget {}", added, budget.max_added_particles),
        });
    }

    // Lockstep scan; new-particle events are kept for condition 4a, which
    // needs the full-window occupation of the before-diagram.
    let mut new_particle_events: Vec<SpacetimePosition> = Vec::new();
    let mut xb = before.clone();
    let mut xa = after.clone();
    let mut t = 0i64;
    let spread = after.bounds().map(|(lo, hi)| hi - lo).unwrap_or(0);
    let cap = window_end + 6 * spread.max(4) + 6 * window_end.max(4) + 64;
    let scan_cap = if weak { deadline.min(window_end) } else { window_end };
    let end = loop {
        scan_b.absorb(t, &xb);
        scan_a.absorb(t, &xa);
        for (i, cell) in xa.iter() {
            let bcell = xb.get(i);
            let count_a = cell.particles().count();
            let count_b = bcell.particles().count();
            // Condition 3: an existing crossing must not become a collision.
            if count_b == 2 && count_a >= 3 {
                push_violation(
                    &mut violations,
                    Violation {
                        condition: 3,
                        location: Some((i, t)),
                        line: None,
                        detail: "existing crossing became a collision".into(),
                    },
                );
            }
            for (s, _) in cell.particles() {
                if bcell.get(s) == formula::FALSE {
                    new_particle_events.push(SpacetimePosition { coord: i, time: t, speed: s });
                    // Condition 5: forbidden positions at the deadline.
                    if t == deadline {
                        if let Some((lo, hi)) = budget.protected_interval {
                            let on_target =
                                budget.target_lines.iter().any(|l| l.speed == s && l.at(t) == i);
                            if i >= lo && i <= hi && !on_target {
                                push_violation(
                                    &mut violations,
                                    Violation {
                                        condition: 5,
                                        location: Some((i, t)),
                                        line: None,
                                        detail: format!(
                                            "forbidden position ({}, {}, {}) gained a Boolean particle",
                                            i, t, s
                                        ),
                                    },
                                );
                            }
                        }
                    }
                }
            }
        }
        if weak {
            if t >= scan_cap {
                break t;
            }
        } else if t >= scan_cap && wavefront_separated(&xa, true) && wavefront_separated(&xb, true)
        {
            break t;
        }
        assert!(t <= cap, "validation scan failed to stabilize by t={}", cap);
        xb = xb.logical_step();
        xa = xa.logical_step();
        t += 1;
    };

    // Condition 4a: new Boolean particle riding a protected or previously
    // occupied line.
    let in_cond4_scope = |l: &Line| {
        !budget.target_lines.contains(l)
            && !budget.exempt_lines.contains(l)
            && (budget.protected_lines.contains(l) || scan_b.occupied.contains(l))
    };
    for pos in &new_particle_events {
        let l = line_through(*pos);
        if in_cond4_scope(&l) {
            push_violation(
                &mut violations,
                Violation {
                    condition: 4,
                    location: Some((pos.coord, pos.time)),
                    line: Some(l),
                    detail: "protected line gained a Boolean particle".into(),
                },
            );
            break;
        }
    }
    // Condition 4b: new collision on a protected/occupied line's path.
    for &(i, tc) in scan_a.collisions.difference(&scan_b.collisions) {
        for s in Speed::ALL {
            let l = Line::through(i, tc, s);
            if in_cond4_scope(&l) {
                push_violation(
                    &mut violations,
                    Violation {
                        condition: 4,
                        location: Some((i, tc)),
                        line: Some(l),
                        detail: "protected line gained a collision".into(),
                    },
                );
            }
        }
    }

    // Condition 6: no collision on a target line after the deadline.
    if !weak {
        for &(i, tc) in &scan_a.collisions {
            if tc > deadline {
                for l in &budget.target_lines {
                    if l.at(tc) == i {
                        push_violation(
                            &mut violations,
                            Violation {
                                condition: 6,
                                location: Some((i, tc)),
                                line: Some(*l),
                                detail: "target line has a collision after the deadline".into(),
                            },
                        );
                    }
                }
            }
        }
    }

    // Condition 2: counts of new occupied lines and new crossings.
    let new_occupied: Vec<Line> = scan_a.occupied.difference(&scan_b.occupied).copied().collect();
    let new_crossings: Vec<(i64, i64)> =
        scan_a.crossings.difference(&scan_b.crossings).copied().collect();
    let new_collisions: Vec<(i64, i64)> =
        scan_a.collisions.difference(&scan_b.collisions).copied().collect();
    if new_occupied.len() > budget.max_added_particles {
        violations.push(Violation {
            condition: 2,
            location: None,
            line: None,
            detail: format!(
                "{} new occupied lines, budget {}",
                new_occupied.len(),
                budget.max_added_particles
            ),
        });
    }
    if new_crossings.len() > budget.max_new_crossings {
        violations.push(Violation {
            condition: 2,
            location: None,
            line: None,
            detail: format!(
                "{} new crossings, budget {}",
                new_crossings.len(),
                budget.max_new_crossings
            ),
        });
    }

    violations.sort_by_key(|v| v.condition);
    ValidationReport {
        ok: violations.is_empty(),
        violations,
        added_particles: added,
        new_occupied_lines: new_occupied,
        new_crossings,
        new_collisions,
        occupied_after: scan_a.occupied,
        crossings_after: scan_a.crossings,
        collisions_after: scan_a.collisions,
        window_end: end,
        weak,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_ca::{Cell, Configuration};

    #[test]
    fn line_normalization() {
        let l = Line::through(5, 0, Speed::Pos2);
        assert_eq!(l.base, 5);
        assert_eq!(Line::through(5, 1, Speed::Pos2).base, 3);
        let p = SpacetimePosition { coord: 7, time: 3, speed: Speed::Neg1 };
        let l = line_through(p);
        assert_eq!(l.position(3), p);
    }

    #[test]
    fn intersections() {
        // Symmetric closing speeds meet at (2, 1).
        let a = Line::new(Speed::Pos2, 0);
        let b = Line::new(Speed::Neg2, 4);
        match intersect(a, b) {
            LineIntersection::At { coord, time } => {
                assert_eq!(coord, Rational::integer(2));
                assert_eq!(time, Rational::integer(1));
            }
            other => panic!("unexpected {:?}", other),
        }
        assert_eq!(
            intersect(Line::new(Speed::Pos2, 0), Line::new(Speed::Pos2, 1)),
            LineIntersection::Parallel
        );
        assert_eq!(
            intersect(Line::new(Speed::Pos2, 0), Line::new(Speed::Pos2, 0)),
            LineIntersection::Same
        );
    }

    #[test]
    fn movement_line_intersection_table() {
        // The incidental meets of the movement gadget's lines L1 and L3:
        // with source (j, t) and parameters (k, k'), they meet at
        // (j + 2k - k'/2, t + k + k'/4).
        let (j, t, k, kp) = (3i64, 2i64, 5i64, 4i64);
        let l1 = Line::new(Speed::Pos2, j - 2 * t - kp);
        let l3 = Line::new(Speed::Neg2, j + 2 * t + 4 * k);
        match intersect(l1, l3) {
            LineIntersection::At { coord, time } => {
                assert_eq!(coord, Rational::new(2 * (j + 2 * k) - kp, 2));
                assert_eq!(time, Rational::new(4 * (t + k) + kp, 4));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn cone_membership() {
        let c = Cone::new(0, 10);
        assert!(c.contains(0, 10));
        assert!(c.contains(-5, 15));
        assert!(!c.contains(-6, 15));
        assert!(!c.contains(0, 9));
    }

    #[test]
    fn empty_modification_is_valid() {
        let mut x = Configuration::new();
        x.set(0, Cell::from_raw(0b0001));
        let lx = LogicalConfiguration::embed(&x);
        let budget = ControlBudget {
            max_added_particles: 0,
            max_new_crossings: 0,
            deadline: 5,
            ..Default::default()
        };
        let report = validate_controlled(&lx, &lx, &budget, 10, false);
        assert!(report.ok, "{}", report.to_text());
    }

    #[test]
    fn protected_line_gaining_particle_is_reported() {
        // A +2 particle at 0 and a protected +2 line at base 4. Adding a
        // particle riding the protected line is a condition 4 violation.
        let mut before = Configuration::new();
        before.set(0, Cell::from_raw(0b0001));
        let mut after = before.clone();
        after.set(4, Cell::from_raw(0b0001));
        let mut budget = ControlBudget {
            max_added_particles: 4,
            max_new_crossings: 8,
            deadline: 6,
            ..Default::default()
        };
        budget.protected_lines.insert(Line::new(Speed::Pos2, 4));
        let report = validate_controlled(
            &LogicalConfiguration::embed(&before),
            &LogicalConfiguration::embed(&after),
            &budget,
            10,
            false,
        );
        assert!(!report.ok);
        assert_eq!(report.violations[0].condition, 4);
    }

    #[test]
    fn budget_monotonicity() {
        // Enlarging a and b never turns a valid modification invalid.
        let mut before = Configuration::new();
        before.set(0, Cell::from_raw(0b0010));
        let mut after = before.clone();
        after.set(9, Cell::from_raw(0b0100));
        let lb = LogicalConfiguration::embed(&before);
        let la = LogicalConfiguration::embed(&after);
        let mut budget = ControlBudget {
            max_added_particles: 2,
            max_new_crossings: 4,
            deadline: 8,
            ..Default::default()
        };
        let r1 = validate_controlled(&lb, &la, &budget, 12, false);
        budget.max_added_particles = 10;
        budget.max_new_crossings = 40;
        let r2 = validate_controlled(&lb, &la, &budget, 12, false);
        assert!(!r1.ok || r2.ok);
        assert!(r2.ok, "{}", r2.to_text());
    }
}
