//! The concrete 16-state partitioned automaton: four speed tracks per cell,
//! shift each track by its speed, then apply the collision bijection to
//! every cell.
//!
//! Configurations are finite-support maps from lattice coordinates to cells
//! over an all-zero background, kept in canonical sparse form (no stored
//! zero cells).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

/// Track speeds, in the canonical order used everywhere: +2, +1, -1, -2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Speed {
    Pos2,
    Pos1,
    Neg1,
    Neg2,
}

impl Speed {
    pub const ALL: [Speed; 4] = [Speed::Pos2, Speed::Pos1, Speed::Neg1, Speed::Neg2];

    /// Signed displacement per step.
    pub fn value(self) -> i64 {
        match self {
            Speed::Pos2 => 2,
            Speed::Pos1 => 1,
            Speed::Neg1 => -1,
            Speed::Neg2 => -2,
        }
    }

    /// Index in the canonical track order (also the bit position in a cell).
    pub fn index(self) -> usize {
        match self {
            Speed::Pos2 => 0,
            Speed::Pos1 => 1,
            Speed::Neg1 => 2,
            Speed::Neg2 => 3,
        }
    }

    pub fn from_index(i: usize) -> Speed {
        Speed::ALL[i]
    }

    /// Spatial mirror image (negated speed).
    pub fn mirrored(self) -> Speed {
        match self {
            Speed::Pos2 => Speed::Neg2,
            Speed::Pos1 => Speed::Neg1,
            Speed::Neg1 => Speed::Pos1,
            Speed::Neg2 => Speed::Pos2,
        }
    }

    pub fn is_right(self) -> bool {
        matches!(self, Speed::Pos2 | Speed::Pos1)
    }

    pub fn is_fast(self) -> bool {
        matches!(self, Speed::Pos2 | Speed::Neg2)
    }
}

impl fmt::Display for Speed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Particle occupancy of one lattice site, one bit per speed track.
///
/// Bit 0 is speed +2, bit 1 is +1, bit 2 is -1 and bit 3 is -2, matching the
/// canonical track order. Exactly 16 values exist; the all-zero cell is the
/// quiescent background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cell(u8);

impl Cell {
    pub const EMPTY: Cell = Cell(0);

    pub fn from_raw(bits: u8) -> Cell {
        assert!(bits < 16, "cell occupancy is 4 bits");
        Cell(bits)
    }

    pub fn raw(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: [bool; 4]) -> Cell {
        let mut raw = 0u8;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                raw |= 1 << i;
            }
        }
        Cell(raw)
    }

    pub fn bits(self) -> [bool; 4] {
        [self.get(Speed::Pos2), self.get(Speed::Pos1), self.get(Speed::Neg1), self.get(Speed::Neg2)]
    }

    pub fn get(self, s: Speed) -> bool {
        self.0 >> s.index() & 1 == 1
    }

    pub fn with(self, s: Speed, occupied: bool) -> Cell {
        if occupied {
            Cell(self.0 | 1 << s.index())
        } else {
            Cell(self.0 & !(1 << s.index()))
        }
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Number of particles in the cell.
    pub fn count(self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in Speed::ALL {
            write!(f, "{}", if self.get(s) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// The collision bijection on one cell.
///
/// If both fast particles are present the two slow particles swap tracks,
/// and if both slow particles are present the two fast particles swap; both
/// conditions are read off the incoming state. Every other state is fixed.
pub fn gamma(c: Cell) -> Cell {
    gamma_table()[c.0 as usize]
}

fn gamma_raw(c: Cell) -> Cell {
    let [a, b, cc, d] = c.bits();
    let fast_pair = a && d;
    let slow_pair = b && cc;
    Cell::from_bits([
        if slow_pair { d } else { a },
        if fast_pair { cc } else { b },
        if fast_pair { b } else { cc },
        if slow_pair { a } else { d },
    ])
}

/// Precomputed 16-entry table for `gamma`, validated once against the two
/// rewrite patterns.
pub fn gamma_table() -> &'static [Cell; 16] {
    static TABLE: OnceLock<[Cell; 16]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [Cell::EMPTY; 16];
        for raw in 0..16u8 {
            t[raw as usize] = gamma_raw(Cell(raw));
        }
        // Self-check: (1,a,b,1) -> (1,b,a,1) and (a,1,1,b) -> (b,1,1,a),
        // everything else fixed.
        for raw in 0..16u8 {
            let c = Cell(raw);
            let [a, b, cc, d] = c.bits();
            let expect = if a && d {
                Cell::from_bits([a, cc, b, d])
            } else if b && cc {
                Cell::from_bits([d, b, cc, a])
            } else {
                c
            };
            assert_eq!(t[raw as usize], expect, "gamma table self-check failed at {:04b}", raw);
        }
        t
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigParseError {
    Syntax { line: usize, message: String },
    DuplicateCoordinate { line: usize, coordinate: i64 },
}

impl fmt::Display for ConfigParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigParseError::Syntax { line, message } => {
                write!(f, "line {}: {}", line, message)
            }
            ConfigParseError::DuplicateCoordinate { line, coordinate } => {
                write!(f, "line {}: duplicate coordinate {}", line, coordinate)
            }
        }
    }
}

impl std::error::Error for ConfigParseError {}

/// Finite-support assignment of cells to integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Configuration {
    cells: BTreeMap<i64, Cell>,
}

impl Configuration {
    pub fn new() -> Self {
        Configuration::default()
    }

    pub fn get(&self, coord: i64) -> Cell {
        self.cells.get(&coord).copied().unwrap_or(Cell::EMPTY)
    }

    /// Set a cell, pruning zero cells to keep the canonical sparse form.
    pub fn set(&mut self, coord: i64, cell: Cell) {
        if cell.is_empty() {
            self.cells.remove(&coord);
        } else {
            self.cells.insert(coord, cell);
        }
    }

    /// Set one track bit of a cell.
    pub fn set_particle(&mut self, coord: i64, speed: Speed, present: bool) {
        let cell = self.get(coord).with(speed, present);
        self.set(coord, cell);
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Cell)> + '_ {
        self.cells.iter().map(|(&i, &c)| (i, c))
    }

    pub fn support_len(&self) -> usize {
        self.cells.len()
    }

    /// Smallest and largest occupied coordinate.
    pub fn bounds(&self) -> Option<(i64, i64)> {
        let min = *self.cells.keys().next()?;
        let max = *self.cells.keys().next_back()?;
        Some((min, max))
    }

    /// Total number of particles over all cells (invariant under `step`).
    pub fn particle_count(&self) -> u64 {
        self.cells.values().map(|c| c.count() as u64).sum()
    }

    /// Bitwise union with another configuration.
    ///
    /// Panics if any track is occupied in both; used to join a gadget with
    /// an input block on disjoint cells.
    pub fn union(&self, other: &Configuration) -> Configuration {
        let mut out = self.clone();
        for (i, c) in other.iter() {
            let existing = out.get(i);
            assert_eq!(existing.raw() & c.raw(), 0, "configuration union overlaps at {}", i);
            out.set(i, Cell::from_raw(existing.raw() | c.raw()));
        }
        out
    }

    /// One forward step: translate each track by its speed, then apply the
    /// collision bijection cellwise.
    pub fn step(&self) -> Configuration {
        let mut shifted: BTreeMap<i64, u8> = BTreeMap::new();
        for (&i, &c) in &self.cells {
            for s in Speed::ALL {
                if c.get(s) {
                    let j = i.checked_add(s.value()).expect("coordinate overflow");
                    *shifted.entry(j).or_insert(0) |= 1 << s.index();
                }
            }
        }
        let mut out = Configuration::new();
        for (i, raw) in shifted {
            out.set(i, gamma(Cell(raw)));
        }
        out
    }

    /// Exact inverse of `step`: apply the (self-inverse) bijection, then
    /// translate each track by the negated speed.
    pub fn step_inverse(&self) -> Configuration {
        let mut out = Configuration::new();
        let mut shifted: BTreeMap<i64, u8> = BTreeMap::new();
        for (&i, &c) in &self.cells {
            let g = gamma(c);
            for s in Speed::ALL {
                if g.get(s) {
                    let j = i.checked_sub(s.value()).expect("coordinate overflow");
                    *shifted.entry(j).or_insert(0) |= 1 << s.index();
                }
            }
        }
        for (i, raw) in shifted {
            out.set(i, Cell(raw));
        }
        out
    }

    /// Iterate `step` (t >= 0) or `step_inverse` (t < 0).
    pub fn run(&self, t: i64) -> Configuration {
        let mut x = self.clone();
        if t >= 0 {
            for _ in 0..t {
                x = x.step();
            }
        } else {
            for _ in 0..-t {
                x = x.step_inverse();
            }
        }
        x
    }

    /// Parse the text format: one `<coordinate> <bits>` pair per line,
    /// `#` starts a comment. All-zero cells are accepted and normalized
    /// away; duplicate coordinates are an error.
    pub fn parse(text: &str) -> Result<Configuration, ConfigParseError> {
        let mut out = Configuration::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let coord: i64 = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|e| ConfigParseError::Syntax {
                    line: line_no,
                    message: format!("bad coordinate: {}", e),
                })?;
            let bits = parts.next().ok_or_else(|| ConfigParseError::Syntax {
                line: line_no,
                message: "missing track bits".into(),
            })?;
            if parts.next().is_some() {
                return Err(ConfigParseError::Syntax {
                    line: line_no,
                    message: "trailing tokens".into(),
                });
            }
            if bits.len() != 4 || !bits.chars().all(|ch| ch == '0' || ch == '1') {
                return Err(ConfigParseError::Syntax {
                    line: line_no,
                    message: format!("track bits must be four 0/1 characters, got {:?}", bits),
                });
            }
            let mut cell = Cell::EMPTY;
            for (i, ch) in bits.chars().enumerate() {
                if ch == '1' {
                    cell = cell.with(Speed::from_index(i), true);
                }
            }
            if out.cells.contains_key(&coord) {
                return Err(ConfigParseError::DuplicateCoordinate { line: line_no, coordinate: coord });
            }
            if !cell.is_empty() {
                out.set(coord, cell);
            }
        }
        Ok(out)
    }

    /// Serialize to the text format, lines sorted by coordinate.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.iter() {
            s.push_str(&format!("{} {}\n", i, c));
        }
        s
    }
}

impl FromIterator<(i64, Cell)> for Configuration {
    fn from_iter<T: IntoIterator<Item = (i64, Cell)>>(iter: T) -> Self {
        let mut out = Configuration::new();
        for (i, c) in iter {
            out.set(i, c);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(bits: [u8; 4]) -> Cell {
        Cell::from_bits([bits[0] == 1, bits[1] == 1, bits[2] == 1, bits[3] == 1])
    }

    #[test]
    fn gamma_rewrite_rules() {
        // (1,a,b,1) -> (1,b,a,1) with a=0, b=1.
        assert_eq!(gamma(cell([1, 0, 1, 1])), cell([1, 1, 0, 1]));
        // (a,1,1,b) -> (b,1,1,a) with a=0, b=1.
        assert_eq!(gamma(cell([0, 1, 1, 1])), cell([1, 1, 1, 0]));
        // Everything else is fixed.
        assert_eq!(gamma(cell([0, 1, 0, 0])), cell([0, 1, 0, 0]));
        // Both patterns apply with a=b=1 and fix the state.
        assert_eq!(gamma(cell([1, 1, 1, 1])), cell([1, 1, 1, 1]));
    }

    #[test]
    fn gamma_is_involution() {
        for raw in 0..16u8 {
            let c = Cell::from_raw(raw);
            assert_eq!(gamma(gamma(c)), c);
        }
    }

    #[test]
    fn step_lone_particle() {
        let mut x = Configuration::new();
        x.set(0, cell([1, 0, 0, 0]));
        let y = x.step();
        let mut expect = Configuration::new();
        expect.set(2, cell([1, 0, 0, 0]));
        assert_eq!(y, expect);
        assert_eq!(Configuration::new().step(), Configuration::new());
    }

    #[test]
    fn step_three_particle_collision() {
        // Particles at 0 (+2), 1 (+1), 4 (-2) all land at coordinate 2,
        // where the two fast particles reverse the slow one.
        let mut x = Configuration::new();
        x.set(0, cell([1, 0, 0, 0]));
        x.set(1, cell([0, 1, 0, 0]));
        x.set(4, cell([0, 0, 0, 1]));
        let y = x.step();
        let mut expect = Configuration::new();
        expect.set(2, cell([1, 0, 1, 1]));
        assert_eq!(y, expect);
        assert_eq!(y.step_inverse(), x);
    }

    #[test]
    fn run_and_reverse() {
        let mut x = Configuration::new();
        x.set(0, cell([1, 0, 0, 0]));
        let mut expect = Configuration::new();
        expect.set(10, cell([1, 0, 0, 0]));
        assert_eq!(x.run(5), expect);
        assert_eq!(x.run(0), x);
        assert_eq!(x.run(7).run(-7), x);
    }

    #[test]
    fn particle_conservation() {
        let mut x = Configuration::new();
        x.set(0, cell([1, 1, 1, 1]));
        x.set(3, cell([0, 1, 1, 0]));
        x.set(-2, cell([1, 0, 0, 1]));
        let n = x.particle_count();
        let mut y = x.clone();
        for _ in 0..20 {
            y = y.step();
            assert_eq!(y.particle_count(), n);
        }
    }

    #[test]
    fn speed_of_light() {
        let mut x = Configuration::new();
        x.set(-1, cell([1, 1, 1, 1]));
        x.set(5, cell([1, 1, 1, 1]));
        let y = x.step();
        let (lo, hi) = y.bounds().unwrap();
        assert!(lo >= -3 && hi <= 7);
    }

    #[test]
    fn text_round_trip() {
        let text = "# sample\n-3 0110\n0 1000\n12 0001\n";
        let x = Configuration::parse(text).unwrap();
        assert_eq!(x.to_text(), "-3 0110\n0 1000\n12 0001\n");
        assert_eq!(Configuration::parse(&x.to_text()).unwrap(), x);
        assert!(Configuration::parse("0 10a0").is_err());
        assert!(Configuration::parse("0 1000\n0 0100").is_err());
    }
}
