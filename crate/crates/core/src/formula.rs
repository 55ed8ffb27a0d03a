//! Hash-consed Boolean formulas over named variables.
//!
//! NAND is the sole primitive connective; everything else (`not`, `and`,
//! `or`, `xor`, the ternary conditional) is a derived constructor. Formulas
//! live in a global append-only store, so structurally equal constructions
//! return the identical handle and equality of handles is structural
//! equality. Construction applies eager local constant folding; semantic
//! queries (`is_constant`, `equivalent`) enumerate truth tables and are
//! capped at [`SUPPORT_CAP`] variables.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// Maximum joint support size for exhaustive semantic checks.
pub const SUPPORT_CAP: usize = 24;

/// Variables usable in one process. Indices are dense per synthesis
/// instance, so this is far more than desk scale needs.
pub const MAX_VARIABLES: u32 = 128;

/// A named Boolean variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(pub u32);

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Handle to a hash-consed formula node.
///
/// Copyable and cheap; handle equality is structural equality of the
/// underlying DAGs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Formula(u32);

/// The constant-0 formula.
pub const FALSE: Formula = Formula(0);
/// The constant-1 formula.
pub const TRUE: Formula = Formula(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Const(bool),
    Var(u32),
    Nand(Formula, Formula),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormulaError {
    /// A semantic check would need a truth table over more than
    /// [`SUPPORT_CAP`] variables.
    SupportTooLarge { support: usize, cap: usize },
    /// `evaluate` hit a variable the valuation does not assign.
    MissingVariable(VariableId),
}

impl fmt::Display for FormulaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaError::SupportTooLarge { support, cap } => {
                write!(f, "support of {} variables exceeds semantic cap {}", support, cap)
            }
            FormulaError::MissingVariable(v) => write!(f, "valuation missing variable {}", v),
        }
    }
}

impl std::error::Error for FormulaError {}

struct Store {
    nodes: Vec<Node>,
    index: HashMap<Node, Formula>,
    /// 128-lane evaluation under a fixed pseudo-random assignment per
    /// variable; a nonzero/non-full signature is a cheap witness of
    /// non-constness.
    sig: Vec<[u64; 2]>,
    /// Support as a variable bitmask.
    support: Vec<u128>,
    /// Memoized semantic constness (None = not yet decided).
    constness: Vec<Option<Option<bool>>>,
}

impl Store {
    fn new() -> Self {
        let mut s = Store {
            nodes: Vec::new(),
            index: HashMap::new(),
            sig: Vec::new(),
            support: Vec::new(),
            constness: Vec::new(),
        };
        s.intern(Node::Const(false));
        s.intern(Node::Const(true));
        s
    }

    fn intern(&mut self, node: Node) -> Formula {
        if let Some(&f) = self.index.get(&node) {
            return f;
        }
        let id = Formula(self.nodes.len() as u32);
        let (sig, support, constness) = match node {
            Node::Const(b) => {
                let lane = if b { !0u64 } else { 0 };
                ([lane; 2], 0u128, Some(Some(b)))
            }
            Node::Var(v) => (var_signature(v), 1u128 << v, Some(None)),
            Node::Nand(a, b) => {
                let sa = self.sig[a.0 as usize];
                let sb = self.sig[b.0 as usize];
                let sig = [!(sa[0] & sb[0]), !(sa[1] & sb[1])];
                let support = self.support[a.0 as usize] | self.support[b.0 as usize];
                (sig, support, None)
            }
        };
        self.nodes.push(node);
        self.sig.push(sig);
        self.support.push(support);
        self.constness.push(constness);
        self.index.insert(node, id);
        id
    }
}

static STORE: OnceLock<Mutex<Store>> = OnceLock::new();

fn store() -> &'static Mutex<Store> {
    STORE.get_or_init(|| Mutex::new(Store::new()))
}

/// Fixed pseudo-random 128-bit lane pattern for a variable (splitmix64).
fn var_signature(v: u32) -> [u64; 2] {
    fn splitmix(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9e3779b97f4a7c15);
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
        x ^ (x >> 31)
    }
    let a = splitmix(v as u64 ^ 0xD1FF_0000);
    let b = splitmix(a ^ 0x5EED_5EED);
    [a, b]
}

/// The constant formula for a bit.
pub fn constant(b: bool) -> Formula {
    if b {
        TRUE
    } else {
        FALSE
    }
}

/// The formula consisting of a single variable.
pub fn variable(v: VariableId) -> Formula {
    assert!(v.0 < MAX_VARIABLES, "variable index {} out of range", v.0);
    store().lock().unwrap().intern(Node::Var(v.0))
}

fn node_of(f: Formula) -> Node {
    store().lock().unwrap().nodes[f.0 as usize]
}

/// NAND of two formulas, with eager local folding.
pub fn nand(a: Formula, b: Formula) -> Formula {
    let mut st = store().lock().unwrap();
    nand_in(&mut st, a, b)
}

fn nand_in(st: &mut Store, a: Formula, b: Formula) -> Formula {
    if a == FALSE || b == FALSE {
        return TRUE;
    }
    if a == TRUE && b == TRUE {
        return FALSE;
    }
    // nand(1, x) ≡ nand(x, x); canonicalize so negations share one shape.
    let (a, b) = if a == TRUE {
        (b, b)
    } else if b == TRUE {
        (a, a)
    } else if a <= b {
        (a, b)
    } else {
        (b, a)
    };
    if a == b {
        // Double negation: nand(¬x, ¬x) = x.
        if let Node::Nand(x, y) = st.nodes[a.0 as usize] {
            if x == y {
                return x;
            }
        }
    } else {
        // nand(x, ¬x) = 1.
        if let Node::Nand(x, y) = st.nodes[b.0 as usize] {
            if x == y && x == a {
                return TRUE;
            }
        }
        if let Node::Nand(x, y) = st.nodes[a.0 as usize] {
            if x == y && x == b {
                return TRUE;
            }
        }
    }
    st.intern(Node::Nand(a, b))
}

/// Negation, as `nand(x, x)`.
pub fn not(a: Formula) -> Formula {
    nand(a, a)
}

/// Conjunction, as `¬nand(a, b)`.
pub fn and(a: Formula, b: Formula) -> Formula {
    let mut st = store().lock().unwrap();
    let n = nand_in(&mut st, a, b);
    nand_in(&mut st, n, n)
}

/// Disjunction.
pub fn or(a: Formula, b: Formula) -> Formula {
    let mut st = store().lock().unwrap();
    let na = nand_in(&mut st, a, a);
    let nb = nand_in(&mut st, b, b);
    nand_in(&mut st, na, nb)
}

/// Exclusive or.
pub fn xor(a: Formula, b: Formula) -> Formula {
    let mut st = store().lock().unwrap();
    let t = nand_in(&mut st, a, b);
    let l = nand_in(&mut st, a, t);
    let r = nand_in(&mut st, b, t);
    nand_in(&mut st, l, r)
}

/// Ternary conditional `a ? b : c`.
///
/// Simplifies to `b` when `a` is constant 1 and to `c` when constant 0; the
/// general form is `(a ∧ b) ∨ (¬a ∧ c)` spelled in NANDs.
pub fn conditional(a: Formula, b: Formula, c: Formula) -> Formula {
    if a == TRUE {
        return b;
    }
    if a == FALSE {
        return c;
    }
    if b == c {
        return b;
    }
    if b == TRUE && c == FALSE {
        return a;
    }
    let mut st = store().lock().unwrap();
    if b == FALSE && c == TRUE {
        return nand_in(&mut st, a, a);
    }
    let ab = nand_in(&mut st, a, b);
    let na = nand_in(&mut st, a, a);
    let nac = nand_in(&mut st, na, c);
    nand_in(&mut st, ab, nac)
}

/// A (partial) assignment of bits to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation {
    assignment: HashMap<u32, bool>,
}

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    /// Valuation assigning `bits[i]` to variable `i`.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Valuation::new();
        for (i, &b) in bits.iter().enumerate() {
            v.set(VariableId(i as u32), b);
        }
        v
    }

    pub fn set(&mut self, var: VariableId, bit: bool) {
        self.assignment.insert(var.0, bit);
    }

    pub fn get(&self, var: VariableId) -> Option<bool> {
        self.assignment.get(&var.0).copied()
    }
}

/// Variables referenced by a formula, in increasing index order.
pub fn support(f: Formula) -> Vec<VariableId> {
    let mask = store().lock().unwrap().support[f.0 as usize];
    mask_vars(mask)
}

fn mask_vars(mask: u128) -> Vec<VariableId> {
    (0..MAX_VARIABLES).filter(|i| mask >> i & 1 == 1).map(VariableId).collect()
}

fn support_mask(f: Formula) -> u128 {
    store().lock().unwrap().support[f.0 as usize]
}

/// Standard Boolean evaluation under a valuation total on the support.
pub fn evaluate(f: Formula, v: &Valuation) -> Result<bool, FormulaError> {
    // Iterative DAG walk with a memo; recursion depth is unbounded on
    // pathological chains.
    let mut memo: HashMap<Formula, bool> = HashMap::new();
    let mut stack = vec![f];
    while let Some(&g) = stack.last() {
        if memo.contains_key(&g) {
            stack.pop();
            continue;
        }
        match node_of(g) {
            Node::Const(b) => {
                memo.insert(g, b);
                stack.pop();
            }
            Node::Var(i) => {
                let bit = v
                    .get(VariableId(i))
                    .ok_or(FormulaError::MissingVariable(VariableId(i)))?;
                memo.insert(g, bit);
                stack.pop();
            }
            Node::Nand(a, b) => match (memo.get(&a), memo.get(&b)) {
                (Some(&x), Some(&y)) => {
                    memo.insert(g, !(x && y));
                    stack.pop();
                }
                _ => {
                    stack.push(a);
                    stack.push(b);
                }
            },
        }
    }
    Ok(memo[&f])
}

/// Truth table of `f` over the variable list `vars` (row index bit `i` is
/// the value of `vars[i]`), packed 64 rows per word.
fn truth_table(f: Formula, vars: &[VariableId]) -> Vec<u64> {
    let k = vars.len();
    let words = 1usize.max((1usize << k) >> 6);
    let row_bits = 1usize << k;
    // Lane patterns per variable: variable i alternates in blocks of 2^i rows.
    let mut var_tables: HashMap<u32, Vec<u64>> = HashMap::new();
    for (i, v) in vars.iter().enumerate() {
        let mut t = vec![0u64; words];
        for row in 0..row_bits {
            if row >> i & 1 == 1 {
                t[row >> 6] |= 1u64 << (row & 63);
            }
        }
        var_tables.insert(v.0, t);
    }
    let mask_last = if row_bits >= 64 { !0u64 } else { (1u64 << row_bits) - 1 };

    let mut memo: HashMap<Formula, Vec<u64>> = HashMap::new();
    let mut stack = vec![f];
    while let Some(&g) = stack.last() {
        if memo.contains_key(&g) {
            stack.pop();
            continue;
        }
        match node_of(g) {
            Node::Const(b) => {
                let w = if b { !0u64 } else { 0 };
                memo.insert(g, vec![w; words]);
                stack.pop();
            }
            Node::Var(i) => {
                let t = var_tables
                    .get(&i)
                    .cloned()
                    .unwrap_or_else(|| panic!("truth_table: variable v{} not in scope", i));
                memo.insert(g, t);
                stack.pop();
            }
            Node::Nand(a, b) => match (memo.get(&a), memo.get(&b)) {
                (Some(x), Some(y)) => {
                    let t: Vec<u64> =
                        x.iter().zip(y.iter()).map(|(&p, &q)| !(p & q)).collect();
                    memo.insert(g, t);
                    stack.pop();
                }
                _ => {
                    stack.push(a);
                    stack.push(b);
                }
            },
        }
    }
    let mut t = memo.remove(&f).unwrap();
    let last = t.len() - 1;
    t[last] &= mask_last;
    if words == 1 {
        t[0] &= mask_last;
    }
    t
}

/// Semantic constness with the strict support cap.
///
/// Returns `Some(bit)` when the formula is semantically constant, `None`
/// when it genuinely depends on its variables.
pub fn is_constant(f: Formula) -> Result<Option<bool>, FormulaError> {
    is_constant_capped(f, SUPPORT_CAP)
}

fn is_constant_capped(f: Formula, cap: usize) -> Result<Option<bool>, FormulaError> {
    {
        let st = store().lock().unwrap();
        if let Some(known) = st.constness[f.0 as usize] {
            return Ok(known);
        }
        // Mixed signature lanes witness non-constness without a table.
        let sig = st.sig[f.0 as usize];
        if (sig[0] != 0 || sig[1] != 0) && (sig[0] != !0 || sig[1] != !0) {
            drop(st);
            store().lock().unwrap().constness[f.0 as usize] = Some(None);
            return Ok(None);
        }
    }
    let vars = support(f);
    if vars.len() > cap {
        return Err(FormulaError::SupportTooLarge { support: vars.len(), cap });
    }
    let table = truth_table(f, &vars);
    let row_bits = 1usize << vars.len();
    let all_zero = table.iter().all(|&w| w == 0);
    let full_mask = if row_bits >= 64 { !0u64 } else { (1u64 << row_bits) - 1 };
    let all_one = if table.len() == 1 {
        table[0] == full_mask
    } else {
        table[..table.len() - 1].iter().all(|&w| w == !0) && table[table.len() - 1] == full_mask
    };
    let verdict = if all_zero {
        Some(false)
    } else if all_one {
        Some(true)
    } else {
        None
    };
    store().lock().unwrap().constness[f.0 as usize] = Some(verdict);
    Ok(verdict)
}

/// Census-grade constant-zero test.
///
/// Like [`is_constant`]` == Some(false)` but only errors when the signature
/// is inconclusive *and* the support exceeds the cap; a formula whose
/// signature already witnesses a satisfying assignment is decided without a
/// table regardless of support size.
pub fn is_zero(f: Formula) -> Result<bool, FormulaError> {
    if f == FALSE {
        return Ok(true);
    }
    {
        let st = store().lock().unwrap();
        if let Some(known) = st.constness[f.0 as usize] {
            return Ok(known == Some(false));
        }
        let sig = st.sig[f.0 as usize];
        if sig[0] != 0 || sig[1] != 0 {
            return Ok(false);
        }
    }
    Ok(is_constant(f)? == Some(false))
}

/// Truth-table equivalence over the joint support (capped).
pub fn equivalent(f: Formula, g: Formula) -> Result<bool, FormulaError> {
    if f == g {
        return Ok(true);
    }
    let mask = support_mask(f) | support_mask(g);
    let vars = mask_vars(mask);
    if vars.len() > SUPPORT_CAP {
        return Err(FormulaError::SupportTooLarge { support: vars.len(), cap: SUPPORT_CAP });
    }
    Ok(truth_table(f, &vars) == truth_table(g, &vars))
}

/// Replace variables by formulas throughout `f`.
pub fn substitute(f: Formula, map: &HashMap<VariableId, Formula>) -> Formula {
    let mut memo: HashMap<Formula, Formula> = HashMap::new();
    let mut stack = vec![f];
    while let Some(&g) = stack.last() {
        if memo.contains_key(&g) {
            stack.pop();
            continue;
        }
        match node_of(g) {
            Node::Const(_) => {
                memo.insert(g, g);
                stack.pop();
            }
            Node::Var(i) => {
                let r = map.get(&VariableId(i)).copied().unwrap_or(g);
                memo.insert(g, r);
                stack.pop();
            }
            Node::Nand(a, b) => match (memo.get(&a).copied(), memo.get(&b).copied()) {
                (Some(x), Some(y)) => {
                    memo.insert(g, nand(x, y));
                    stack.pop();
                }
                _ => {
                    stack.push(a);
                    stack.push(b);
                }
            },
        }
    }
    memo[&f]
}

/// Fold every semantically constant subterm to its constant.
///
/// The result is truth-table equal to the input and contains no NAND node
/// that is itself constant, which the gadget synthesizer relies on.
pub fn semantic_fold(f: Formula) -> Result<Formula, FormulaError> {
    let mut memo: HashMap<Formula, Formula> = HashMap::new();
    let mut stack = vec![f];
    while let Some(&g) = stack.last() {
        if memo.contains_key(&g) {
            stack.pop();
            continue;
        }
        if let Some(b) = is_constant(g)? {
            memo.insert(g, constant(b));
            stack.pop();
            continue;
        }
        match node_of(g) {
            Node::Const(_) | Node::Var(_) => {
                memo.insert(g, g);
                stack.pop();
            }
            Node::Nand(a, b) => match (memo.get(&a).copied(), memo.get(&b).copied()) {
                (Some(x), Some(y)) => {
                    memo.insert(g, nand(x, y));
                    stack.pop();
                }
                _ => {
                    stack.push(a);
                    stack.push(b);
                }
            },
        }
    }
    Ok(memo[&f])
}

/// Number of distinct NAND nodes reachable from the given roots.
pub fn nand_count(roots: &[Formula]) -> usize {
    let mut seen: std::collections::HashSet<Formula> = std::collections::HashSet::new();
    let mut stack: Vec<Formula> = roots.to_vec();
    let mut count = 0;
    while let Some(g) = stack.pop() {
        if !seen.insert(g) {
            continue;
        }
        if let Node::Nand(a, b) = node_of(g) {
            count += 1;
            stack.push(a);
            stack.push(b);
        }
    }
    count
}

/// Structure of a formula node, for conversion to other representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Const(bool),
    Var(VariableId),
    Nand(Formula, Formula),
}

/// The top-level shape of `f`.
pub fn shape(f: Formula) -> Shape {
    match node_of(f) {
        Node::Const(b) => Shape::Const(b),
        Node::Var(i) => Shape::Var(VariableId(i)),
        Node::Nand(a, b) => Shape::Nand(a, b),
    }
}

impl fmt::Display for Formula {
    /// Prefix NAND notation: `(nand v0 (nand v1 v1))`, `0`, `1`, `v3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match node_of(*self) {
            Node::Const(b) => write!(f, "{}", if b { 1 } else { 0 }),
            Node::Var(i) => write!(f, "v{}", i),
            Node::Nand(a, b) => write!(f, "(nand {} {})", a, b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Formula {
        variable(VariableId(i))
    }

    #[test]
    fn hash_consing_identity() {
        let a = nand(v(0), v(1));
        let b = nand(v(1), v(0));
        assert_eq!(a, b);
        assert_eq!(nand(a, a), nand(b, b));
    }

    #[test]
    fn constant_folding() {
        assert_eq!(nand(FALSE, v(0)), TRUE);
        assert_eq!(nand(TRUE, TRUE), FALSE);
        assert_eq!(nand(TRUE, v(0)), not(v(0)));
        assert_eq!(not(not(v(2))), v(2));
        assert_eq!(nand(v(0), not(v(0))), TRUE);
    }

    #[test]
    fn conditional_branches() {
        let (a, b, c) = (v(0), v(1), v(2));
        assert_eq!(conditional(TRUE, b, c), b);
        assert_eq!(conditional(FALSE, b, c), c);
        assert_eq!(conditional(a, b, b), b);
        // p(a,b,c) ≡ (a∧b) ∨ (¬a∧c), 8-row table.
        let direct = or(and(a, b), and(not(a), c));
        assert_eq!(equivalent(conditional(a, b, c), direct), Ok(true));
    }

    #[test]
    fn evaluate_basics() {
        assert_eq!(evaluate(nand(TRUE, TRUE), &Valuation::new()), Ok(false));
        let mut val = Valuation::new();
        val.set(VariableId(0), true);
        assert_eq!(evaluate(v(0), &val), Ok(true));
        // p(v0, v1, v2) at (0, 1, 0) = c = 0.
        let mut val = Valuation::new();
        val.set(VariableId(0), false);
        val.set(VariableId(1), true);
        val.set(VariableId(2), false);
        assert_eq!(evaluate(conditional(v(0), v(1), v(2)), &val), Ok(false));
        assert_eq!(
            evaluate(v(5), &Valuation::new()),
            Err(FormulaError::MissingVariable(VariableId(5)))
        );
    }

    #[test]
    fn constness() {
        assert_eq!(is_constant(and(v(0), not(v(0)))), Ok(Some(false)));
        assert_eq!(is_constant(or(v(0), not(v(0)))), Ok(Some(true)));
        assert_eq!(is_constant(v(0)), Ok(None));
        assert!(is_zero(and(v(3), not(v(3)))).unwrap());
        assert!(!is_zero(v(3)).unwrap());
    }

    #[test]
    fn equivalence_examples() {
        assert_eq!(equivalent(nand(v(0), v(0)), not(v(0))), Ok(true));
        assert_eq!(equivalent(v(0), v(1)), Ok(false));
        assert_eq!(equivalent(xor(v(0), v(1)), xor(v(1), v(0))), Ok(true));
    }

    #[test]
    fn support_and_substitute() {
        let f = conditional(v(0), v(4), v(2));
        assert_eq!(support(f), vec![VariableId(0), VariableId(2), VariableId(4)]);
        let mut map = HashMap::new();
        map.insert(VariableId(0), TRUE);
        assert_eq!(equivalent(substitute(f, &map), v(4)), Ok(true));
    }

    #[test]
    fn semantic_fold_removes_constant_subterms() {
        // nand(v0, nand(v0, v0)) ≡ 1 survives local folding but not semantic.
        let f = nand(v(0), not(v(0)));
        assert_eq!(f, TRUE); // actually caught by the local rule
        let g = nand(nand(v(0), v(1)), v(2));
        let tautology = or(g, not(g));
        assert_eq!(semantic_fold(tautology), Ok(TRUE));
    }

    #[test]
    fn display_prefix_notation() {
        let f = nand(v(0), not(v(1)));
        assert_eq!(f.to_string(), "(nand v0 (nand v1 v1))");
        assert_eq!(TRUE.to_string(), "1");
    }
}
