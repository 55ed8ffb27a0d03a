//! The symbolic twin of the concrete automaton: cells carry Boolean
//! formulas instead of bits, so one run simulates every concrete run at
//! once. Substituting a valuation commutes with stepping.
//!
//! A track holds a *Boolean particle* when its formula is not semantically
//! constant 0; a cell-time with at least two Boolean particles is a
//! *crossing* and with at least three a *collision*. Collisions are the only
//! places where formulas compose.

use crate::core_ca::{Cell, Configuration, Speed};
use crate::formula::{self, Formula, FormulaError, Valuation, VariableId};
use std::collections::BTreeMap;
use std::fmt;

/// One lattice site of the symbolic automaton: a formula per speed track in
/// canonical track order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicalCell(pub [Formula; 4]);

impl LogicalCell {
    pub const EMPTY: LogicalCell = LogicalCell([formula::FALSE; 4]);

    pub fn get(&self, s: Speed) -> Formula {
        self.0[s.index()]
    }

    pub fn with(mut self, s: Speed, f: Formula) -> LogicalCell {
        self.0[s.index()] = f;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.0 == [formula::FALSE; 4]
    }

    /// Speeds whose track holds a Boolean particle (formula not ≡ 0).
    ///
    /// Assumes the cell is canonical, i.e. zero tracks are stored as the
    /// constant-0 node.
    pub fn particles(&self) -> impl Iterator<Item = (Speed, Formula)> + '_ {
        Speed::ALL
            .into_iter()
            .filter(|s| self.0[s.index()] != formula::FALSE)
            .map(|s| (s, self.0[s.index()]))
    }
}

/// A point of the spacetime diagram that may hold one particle: coordinate,
/// time, and speed track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpacetimePosition {
    pub coord: i64,
    pub time: i64,
    pub speed: Speed,
}

impl fmt::Display for SpacetimePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.coord, self.time, self.speed)
    }
}

/// Finite-support assignment of logical cells to coordinates, with the
/// all-zero background elided and every stored track canonicalized (a track
/// that is semantically constant 0 is stored as the constant-0 node).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogicalConfiguration {
    cells: BTreeMap<i64, LogicalCell>,
}

/// The symbolic cell map: with incoming tracks `(a, b, c, d)`, both-fast
/// (`a ∧ d`) conditionally swaps the slow pair and both-slow (`b ∧ c`)
/// conditionally swaps the fast pair. It restricts to the concrete
/// bijection on constants and is an involution.
pub fn gamma_hat(cell: &LogicalCell) -> LogicalCell {
    let [a, b, c, d] = cell.0;
    let slow_pair = formula::and(b, c);
    let fast_pair = formula::and(a, d);
    LogicalCell([
        formula::conditional(slow_pair, d, a),
        formula::conditional(fast_pair, c, b),
        formula::conditional(fast_pair, b, c),
        formula::conditional(slow_pair, a, d),
    ])
}

impl LogicalConfiguration {
    pub fn new() -> Self {
        LogicalConfiguration::default()
    }

    /// Lift a concrete configuration to constant formulas.
    pub fn embed(x: &Configuration) -> LogicalConfiguration {
        let mut out = LogicalConfiguration::new();
        for (i, c) in x.iter() {
            let mut cell = LogicalCell::EMPTY;
            for s in Speed::ALL {
                if c.get(s) {
                    cell = cell.with(s, formula::TRUE);
                }
            }
            out.cells.insert(i, cell);
        }
        out
    }

    /// The fully general `n`-cell input: cell `i` of `[0, n-1]` holds the
    /// four variables `4i .. 4i+3` in track order.
    pub fn fully_general(n: usize) -> LogicalConfiguration {
        let mut out = LogicalConfiguration::new();
        for i in 0..n {
            let cell = LogicalCell([
                formula::variable(VariableId(4 * i as u32)),
                formula::variable(VariableId(4 * i as u32 + 1)),
                formula::variable(VariableId(4 * i as u32 + 2)),
                formula::variable(VariableId(4 * i as u32 + 3)),
            ]);
            out.cells.insert(i as i64, cell);
        }
        out
    }

    pub fn get(&self, coord: i64) -> LogicalCell {
        self.cells.get(&coord).copied().unwrap_or(LogicalCell::EMPTY)
    }

    /// Store a cell, canonicalizing tracks and eliding empty cells.
    pub fn set(&mut self, coord: i64, cell: LogicalCell) {
        let cell = canonical_cell(cell);
        if cell.is_empty() {
            self.cells.remove(&coord);
        } else {
            self.cells.insert(coord, cell);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &LogicalCell)> + '_ {
        self.cells.iter().map(|(&i, c)| (i, c))
    }

    pub fn bounds(&self) -> Option<(i64, i64)> {
        Some((*self.cells.keys().next()?, *self.cells.keys().next_back()?))
    }

    /// Disjoint union; panics if a track is non-zero on both sides.
    pub fn union(&self, other: &LogicalConfiguration) -> LogicalConfiguration {
        let mut out = self.clone();
        for (i, cell) in other.iter() {
            let mut merged = out.get(i);
            for s in Speed::ALL {
                let f = cell.get(s);
                if f != formula::FALSE {
                    assert_eq!(
                        merged.get(s),
                        formula::FALSE,
                        "logical union overlaps at ({}, {})",
                        i,
                        s
                    );
                    merged = merged.with(s, f);
                }
            }
            out.set(i, merged);
        }
        out
    }

    /// One symbolic forward step: shift tracks by their speeds, then apply
    /// the cell map everywhere it can act.
    pub fn logical_step(&self) -> LogicalConfiguration {
        let mut shifted: BTreeMap<i64, LogicalCell> = BTreeMap::new();
        for (&i, cell) in &self.cells {
            for s in Speed::ALL {
                let f = cell.get(s);
                if f != formula::FALSE {
                    let j = i.checked_add(s.value()).expect("coordinate overflow");
                    let e = shifted.entry(j).or_insert(LogicalCell::EMPTY);
                    *e = e.with(s, f);
                }
            }
        }
        let mut out = LogicalConfiguration::new();
        for (i, cell) in shifted {
            out.set(i, gamma_hat(&cell));
        }
        out
    }

    /// Exact inverse of `logical_step`: the cell map is an involution, so
    /// apply it and then shift tracks backward.
    pub fn logical_step_inverse(&self) -> LogicalConfiguration {
        let mut out = LogicalConfiguration::new();
        let mut shifted: BTreeMap<i64, LogicalCell> = BTreeMap::new();
        for (&i, cell) in &self.cells {
            let g = gamma_hat(cell);
            for s in Speed::ALL {
                let f = g.get(s);
                if f != formula::FALSE {
                    let j = i.checked_sub(s.value()).expect("coordinate overflow");
                    let e = shifted.entry(j).or_insert(LogicalCell::EMPTY);
                    *e = e.with(s, f);
                }
            }
        }
        for (i, cell) in shifted {
            out.set(i, cell);
        }
        out
    }

    /// Iterate `logical_step` (t >= 0) or its inverse (t < 0).
    pub fn logical_run(&self, t: i64) -> LogicalConfiguration {
        let mut x = self.clone();
        if t >= 0 {
            for _ in 0..t {
                x = x.logical_step();
            }
        } else {
            for _ in 0..-t {
                x = x.logical_step_inverse();
            }
        }
        x
    }

    /// Evaluate every track under a valuation total on all occurring
    /// variables, producing a concrete configuration.
    pub fn apply_valuation(&self, v: &Valuation) -> Result<Configuration, FormulaError> {
        let mut out = Configuration::new();
        for (i, cell) in self.iter() {
            let mut c = Cell::EMPTY;
            for s in Speed::ALL {
                if formula::evaluate(cell.get(s), v)? {
                    c = c.with(s, true);
                }
            }
            out.set(i, c);
        }
        Ok(out)
    }

    /// Boolean particles of this configuration as spacetime positions at
    /// the given time.
    pub fn particles_at(&self, time: i64) -> Vec<(SpacetimePosition, Formula)> {
        let mut out = Vec::new();
        for (i, cell) in self.iter() {
            for (s, f) in cell.particles() {
                out.push((SpacetimePosition { coord: i, time, speed: s }, f));
            }
        }
        out
    }
}

fn canonical_cell(cell: LogicalCell) -> LogicalCell {
    let mut out = cell;
    for (k, f) in cell.0.into_iter().enumerate() {
        if f != formula::FALSE && formula::is_zero(f).unwrap_or(false) {
            out.0[k] = formula::FALSE;
        }
    }
    out
}

/// Particle, crossing and collision record of a spacetime window.
#[derive(Debug, Clone, Default)]
pub struct Census {
    pub boolean_particles: Vec<(SpacetimePosition, Formula)>,
    pub crossings: Vec<(i64, i64)>,
    pub collisions: Vec<(i64, i64)>,
}

/// Census of the diagram spanned by `x0` (taken as the time-0 state) over
/// `[t_min, t_max]`, simulating backward for negative times.
pub fn census(x0: &LogicalConfiguration, t_min: i64, t_max: i64) -> Result<Census, FormulaError> {
    assert!(t_min <= t_max);
    let mut out = Census::default();
    let record = |t: i64, x: &LogicalConfiguration, out: &mut Census| {
        for (i, cell) in x.iter() {
            let mut count = 0;
            for (s, f) in cell.particles() {
                count += 1;
                out.boolean_particles.push((SpacetimePosition { coord: i, time: t, speed: s }, f));
            }
            if count >= 2 {
                out.crossings.push((i, t));
            }
            if count >= 3 {
                out.collisions.push((i, t));
            }
        }
    };
    let mut x = x0.clone();
    let mut t = 0;
    if t >= t_min && t <= t_max {
        record(t, &x, &mut out);
    }
    while t < t_max {
        x = x.logical_step();
        t += 1;
        if t >= t_min {
            record(t, &x, &mut out);
        }
    }
    let mut x = x0.clone();
    let mut t = 0;
    while t > t_min {
        x = x.logical_step_inverse();
        t -= 1;
        if t <= t_max {
            record(t, &x, &mut out);
        }
    }
    out.boolean_particles.sort();
    out.crossings.sort();
    out.crossings.dedup();
    out.collisions.sort();
    out.collisions.dedup();
    Ok(out)
}

/// Wavefront separation certificate.
///
/// In the direction of simulation (`forward = false` means the dynamics
/// with all speeds negated, i.e. stepping backward in time), once
///
/// * every co-moving fast particle is ahead of every co-moving slow one on
///   both sides, and
/// * every right-mover is strictly right of every left-mover,
///
/// no two particles ever share a cell again: gaps only grow. So no further
/// crossings or collisions occur at later (simulation-direction) times, and
/// no new Boolean particles are created.
pub fn wavefront_separated(x: &LogicalConfiguration, forward: bool) -> bool {
    // Roles under the simulation direction: when stepping backward, the
    // forward-speed -2 track moves right fastest.
    let (fast_r, slow_r, slow_l, fast_l) = if forward {
        (Speed::Pos2, Speed::Pos1, Speed::Neg1, Speed::Neg2)
    } else {
        (Speed::Neg2, Speed::Neg1, Speed::Pos1, Speed::Pos2)
    };
    let mut min_fast_r = i64::MAX;
    let mut max_slow_r = i64::MIN;
    let mut max_fast_l = i64::MIN;
    let mut min_slow_l = i64::MAX;
    let mut min_right = i64::MAX;
    let mut max_left = i64::MIN;
    for (i, cell) in x.iter() {
        for (s, _) in cell.particles() {
            if s == fast_r {
                min_fast_r = min_fast_r.min(i);
            }
            if s == slow_r {
                max_slow_r = max_slow_r.max(i);
            }
            if s == fast_l {
                max_fast_l = max_fast_l.max(i);
            }
            if s == slow_l {
                min_slow_l = min_slow_l.min(i);
            }
            if s == fast_r || s == slow_r {
                min_right = min_right.min(i);
            } else {
                max_left = max_left.max(i);
            }
        }
    }
    min_fast_r >= max_slow_r && max_fast_l <= min_slow_l && min_right > max_left
}

/// Dispersed diffusion pattern: the Boolean particles of the fully general
/// `n`-cell input at the first time `t_dis >= ceil(n/2)` from which the
/// wavefront certificate guarantees no further crossings or collisions.
pub fn diffuse(n: usize) -> Result<(i64, Vec<(SpacetimePosition, Formula)>), FormulaError> {
    assert!(n >= 1);
    let mut x = LogicalConfiguration::fully_general(n);
    let floor = (n as i64 + 1) / 2;
    let mut t = 0;
    loop {
        if t >= floor && wavefront_separated(&x, true) {
            return Ok((t, x.particles_at(t)));
        }
        x = x.logical_step();
        t += 1;
        assert!(t <= 8 * n as i64 + 16, "diffusion failed to separate");
    }
}

/// Reverse diffusion: place the 4n output label formulas on `[0, n-1]` as
/// the pattern desired at the final time, and step backward until the
/// mirrored wavefront certificate holds. Returns the number of backward
/// steps and the dispersed pre-image particles, whose `time` field is
/// relative to the final time (i.e. `-t_back`).
pub fn reverse_diffuse(
    n: usize,
    output_labels: &[Formula],
) -> Result<(i64, Vec<(SpacetimePosition, Formula)>), FormulaError> {
    assert!(n >= 1);
    assert_eq!(output_labels.len(), 4 * n);
    let mut x = LogicalConfiguration::new();
    for i in 0..n {
        let cell = LogicalCell([
            output_labels[4 * i],
            output_labels[4 * i + 1],
            output_labels[4 * i + 2],
            output_labels[4 * i + 3],
        ]);
        x.set(i as i64, cell);
    }
    if x.is_empty() {
        return Ok((0, Vec::new()));
    }
    let mut t_back = 0;
    loop {
        if wavefront_separated(&x, false) {
            let dispersed = x.particles_at(-t_back);
            return Ok((t_back, dispersed));
        }
        x = x.logical_step_inverse();
        t_back += 1;
        assert!(t_back <= 8 * n as i64 + 16, "reverse diffusion failed to separate");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{variable, FALSE, TRUE};

    fn var(i: u32) -> Formula {
        variable(VariableId(i))
    }

    #[test]
    fn embedded_step_matches_concrete() {
        // All 16 cell states as lone cells, plus the collision example.
        for raw in 0..16u8 {
            let mut x = Configuration::new();
            x.set(0, Cell::from_raw(raw));
            let lx = LogicalConfiguration::embed(&x);
            assert_eq!(lx.logical_step(), LogicalConfiguration::embed(&x.step()));
            assert_eq!(lx.logical_step_inverse(), LogicalConfiguration::embed(&x.step_inverse()));
        }
    }

    #[test]
    fn fast_pair_swaps_slows_symbolically() {
        // Cell (α, 1, 1, δ) maps to (δ, 1, 1, α).
        let cell = LogicalCell([var(0), TRUE, TRUE, var(3)]);
        let out = gamma_hat(&cell);
        assert_eq!(out.0, [var(3), TRUE, TRUE, var(0)]);
        // Involution.
        assert_eq!(gamma_hat(&out).0, cell.0);
    }

    #[test]
    fn boolean_particle_creation() {
        // Cell (α, β, 1, 1): the slow pair is conditionally present, and the
        // fast tracks become conditionals. Check semantics on all four maps.
        let cell = LogicalCell([var(0), var(1), TRUE, TRUE]);
        let out = gamma_hat(&cell);
        let a_or_b = formula::or(var(0), var(1));
        assert_eq!(formula::equivalent(out.0[0], a_or_b), Ok(true));
        assert_eq!(formula::equivalent(out.0[3], a_or_b), Ok(true));
        assert_eq!(
            formula::equivalent(out.0[1], formula::or(formula::not(var(0)), var(1))),
            Ok(true)
        );
        assert_eq!(
            formula::equivalent(out.0[2], formula::or(formula::not(var(1)), var(0))),
            Ok(true)
        );
    }

    #[test]
    fn valuation_commutes_with_step() {
        let x = LogicalConfiguration::fully_general(2);
        for bits in 0..256u32 {
            let v = Valuation::from_bits(&(0..8).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>());
            let lhs = x.logical_run(3).apply_valuation(&v).unwrap();
            let rhs = x.apply_valuation(&v).unwrap().run(3);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn census_lone_particle() {
        let mut x = Configuration::new();
        x.set(0, Cell::from_raw(1));
        let c = census(&LogicalConfiguration::embed(&x), 0, 10).unwrap();
        assert_eq!(c.boolean_particles.len(), 11);
        assert!(c.crossings.is_empty());
        assert!(c.collisions.is_empty());
    }

    #[test]
    fn diffuse_n1() {
        let (t_dis, parts) = diffuse(1).unwrap();
        assert_eq!(t_dis, 1);
        assert_eq!(parts.len(), 4);
        // Labels are exactly the four input variables on their tracks.
        for (pos, f) in &parts {
            let expect = match pos.speed {
                Speed::Pos2 => (2, var(0)),
                Speed::Pos1 => (1, var(1)),
                Speed::Neg1 => (-1, var(2)),
                Speed::Neg2 => (-2, var(3)),
            };
            assert_eq!((pos.coord, *f), expect);
        }
    }

    #[test]
    fn diffusion_support_bound() {
        let x = LogicalConfiguration::fully_general(3);
        let mut y = x.clone();
        for t in 1..=12i64 {
            y = y.logical_step();
            let (lo, hi) = y.bounds().unwrap();
            assert!(lo >= -2 * t && hi <= 3 - 1 + 2 * t);
        }
    }

    #[test]
    fn reverse_diffuse_empty_and_mirror() {
        let zeros = vec![FALSE; 4];
        assert_eq!(reverse_diffuse(1, &zeros).unwrap().0, 0);

        // With the fully general variables as output labels, the dispersed
        // pre-image evolves forward into exactly those labels.
        let labels: Vec<_> = (0..4).map(var).collect();
        let (t_back, dispersed) = reverse_diffuse(1, &labels).unwrap();
        let mut x = LogicalConfiguration::new();
        for (pos, f) in &dispersed {
            let mut cell = x.get(pos.coord);
            cell = cell.with(pos.speed, *f);
            x.set(pos.coord, cell);
        }
        let fwd = x.logical_run(t_back);
        assert_eq!(fwd, LogicalConfiguration::fully_general(1));
    }

    #[test]
    fn logical_dump_format() {
        let mut x = LogicalConfiguration::new();
        x.set(3, LogicalCell::EMPTY.with(Speed::Pos1, formula::nand(var(0), formula::not(var(1)))));
        let parts = x.particles_at(0);
        let (pos, f) = parts[0];
        assert_eq!(format!("{} {} {}", pos.coord, pos.speed, f), "3 +1 (nand v0 (nand v1 v1))");
    }
}
