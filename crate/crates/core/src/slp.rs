//! Branch-free straight-line programs for the implicit equation.
//!
//! # Text format
//!
//! ```text
//! slp 1
//! const c0 = 1.5
//! const c1 = -2.0
//! r0 = load x
//! r1 = mul c0 r0
//! r2 = add r1 c1
//! out r2
//! ```
//!
//! * Line 1 is the header `slp 1`.
//! * The constant table follows: `const cN = <float>`, indices `0, 1, …` in
//!   order. Floats use shortest round-trip formatting.
//! * Then one operation per line. The `k`-th operation defines register
//!   `rk`; operands are registers defined earlier or constants:
//!   - `rk = load x|y|z`
//!   - `rk = const cN`
//!   - `rk = add A B`, `rk = mul A B` with `A, B` each `rN` or `cN`
//! * The final line `out rN` names the result register.
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expand::TrivariatePoly;
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    Reg(usize),
    Const(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Load(usize),
    Const(usize),
    Add(Operand, Operand),
    Mul(Operand, Operand),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StraightLineProgram {
    constants: Vec<f64>,
    ops: Vec<Op>,
    output: usize,
}

const AXES: [&str; 3] = ["x", "y", "z"];

impl StraightLineProgram {
    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn multiplications(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Mul(..))).count()
    }

    pub fn additions(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Add(..))).count()
    }

    /// Run the program in 64-bit floats.
    pub fn execute(&self, q: Point3) -> f64 {
        let input = q.to_array();
        let mut regs = Vec::with_capacity(self.ops.len());
        let get = |regs: &Vec<f64>, o: Operand| match o {
            Operand::Reg(r) => regs[r],
            Operand::Const(c) => self.constants[c],
        };
        for op in &self.ops {
            let v = match *op {
                Op::Load(axis) => input[axis],
                Op::Const(c) => self.constants[c],
                Op::Add(a, b) => get(&regs, a) + get(&regs, b),
                Op::Mul(a, b) => get(&regs, a) * get(&regs, b),
            };
            regs.push(v);
        }
        regs[self.output]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("slp 1\n");
        for (i, c) in self.constants.iter().enumerate() {
            writeln!(s, "const c{i} = {}", format_f64(*c)).unwrap();
        }
        let opnd = |o: Operand| match o {
            Operand::Reg(r) => format!("r{r}"),
            Operand::Const(c) => format!("c{c}"),
        };
        for (k, op) in self.ops.iter().enumerate() {
            match *op {
                Op::Load(a) => writeln!(s, "r{k} = load {}", AXES[a]),
                Op::Const(c) => writeln!(s, "r{k} = const c{c}"),
                Op::Add(a, b) => writeln!(s, "r{k} = add {} {}", opnd(a), opnd(b)),
                Op::Mul(a, b) => writeln!(s, "r{k} = mul {} {}", opnd(a), opnd(b)),
            }
            .unwrap();
        }
        writeln!(s, "out r{}", self.output).unwrap();
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::InvalidInput(format!("slp line {line}: {msg}"));
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, "slp 1")) => {}
            Some((n, _)) => return Err(bad(n, "expected header `slp 1`")),
            None => return Err(Error::InvalidInput("empty slp".into())),
        }
        let mut constants = Vec::new();
        let mut ops = Vec::new();
        let mut output = None;
        for (n, line) in lines {
            if output.is_some() {
                return Err(bad(n, "content after `out`"));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["const", name, "=", value] => {
                    if !ops.is_empty() {
                        return Err(bad(n, "constants must precede operations"));
                    }
                    if *name != format!("c{}", constants.len()) {
                        return Err(bad(n, "constants must be numbered consecutively"));
                    }
                    let v: f64 = value.parse().map_err(|_| bad(n, "bad constant"))?;
                    constants.push(v);
                }
                ["out", reg] => {
                    let r = parse_index(reg, 'r').ok_or_else(|| bad(n, "bad output register"))?;
                    if r >= ops.len() {
                        return Err(bad(n, "output register undefined"));
                    }
                    output = Some(r);
                }
                [dest, "=", rest @ ..] => {
                    if parse_index(dest, 'r') != Some(ops.len()) {
                        return Err(bad(n, "registers must be defined in order"));
                    }
                    let operand = |t: &str| -> Result<Operand> {
                        if let Some(r) = parse_index(t, 'r') {
                            if r < ops.len() {
                                return Ok(Operand::Reg(r));
                            }
                        } else if let Some(c) = parse_index(t, 'c') {
                            if c < constants.len() {
                                return Ok(Operand::Const(c));
                            }
                        }
                        Err(bad(n, &format!("undefined operand {t}")))
                    };
                    let op = match rest {
                        ["load", axis] => Op::Load(
                            AXES.iter().position(|a| a == axis).ok_or_else(|| bad(n, "bad axis"))?,
                        ),
                        ["const", c] => match operand(c)? {
                            Operand::Const(c) => Op::Const(c),
                            Operand::Reg(_) => return Err(bad(n, "const takes a constant")),
                        },
                        ["add", a, b] => Op::Add(operand(a)?, operand(b)?),
                        ["mul", a, b] => Op::Mul(operand(a)?, operand(b)?),
                        _ => return Err(bad(n, "unknown operation")),
                    };
                    ops.push(op);
                }
                _ => return Err(bad(n, "unrecognized line")),
            }
        }
        let output = output.ok_or_else(|| Error::InvalidInput("slp has no `out` line".into()))?;
        Ok(StraightLineProgram { constants, ops, output })
    }
}

fn parse_index(tok: &str, prefix: char) -> Option<usize> {
    tok.strip_prefix(prefix)?.parse().ok()
}

/// Shortest round-trip decimal for a finite float.
pub fn format_f64(v: f64) -> String {
    ryu::Buffer::new().format(v).to_string()
}

#[derive(Clone, Copy)]
enum Value {
    Const(f64),
    Reg(usize),
}

struct Emitter {
    constants: Vec<f64>,
    ops: Vec<Op>,
    loads: [Option<usize>; 3],
}

impl Emitter {
    fn push(&mut self, op: Op) -> Value {
        self.ops.push(op);
        Value::Reg(self.ops.len() - 1)
    }

    fn constant(&mut self, c: f64) -> usize {
        match self.constants.iter().position(|k| k.to_bits() == c.to_bits()) {
            Some(i) => i,
            None => {
                self.constants.push(c);
                self.constants.len() - 1
            }
        }
    }

    fn operand(&mut self, v: Value) -> Operand {
        match v {
            Value::Reg(r) => Operand::Reg(r),
            Value::Const(c) => Operand::Const(self.constant(c)),
        }
    }

    fn load(&mut self, axis: usize) -> Value {
        if let Some(r) = self.loads[axis] {
            return Value::Reg(r);
        }
        let Value::Reg(r) = self.push(Op::Load(axis)) else { unreachable!() };
        self.loads[axis] = Some(r);
        Value::Reg(r)
    }

    // 1·v is v exactly, so no instruction is needed.
    fn mul_var(&mut self, acc: Value, axis: usize) -> Value {
        let var = self.load(axis);
        match acc {
            Value::Const(1.0) => var,
            _ => {
                let a = self.operand(acc);
                let b = self.operand(var);
                self.push(Op::Mul(a, b))
            }
        }
    }

    fn add(&mut self, acc: Value, rhs: Value) -> Value {
        let a = self.operand(acc);
        let b = self.operand(rhs);
        self.push(Op::Add(a, b))
    }

    fn horner<T>(&mut self, levels: &[(u8, T)], axis: usize, inner: &mut dyn FnMut(&mut Self, &T) -> Value) -> Value {
        let mut prev = levels[0].0;
        let mut acc = inner(self, &levels[0].1);
        for (e, child) in &levels[1..] {
            for _ in *e..prev {
                acc = self.mul_var(acc, axis);
            }
            let c = inner(self, child);
            acc = self.add(acc, c);
            prev = *e;
        }
        for _ in 0..prev {
            acc = self.mul_var(acc, axis);
        }
        acc
    }
}

/// Emit the program computing exactly the operation sequence of
/// [`TrivariatePoly::evaluate`].
pub fn emit_slp(p: &TrivariatePoly) -> StraightLineProgram {
    let mut em = Emitter { constants: Vec::new(), ops: Vec::new(), loads: [None; 3] };
    let result = if p.is_empty() {
        Value::Const(0.0)
    } else {
        let layout = p.horner_layout();
        em.horner(layout, 0, &mut |em, ys| {
            em.horner(ys, 1, &mut |em, zs| em.horner(zs, 2, &mut |_, c| Value::Const(*c)))
        })
    };
    let output = match result {
        Value::Reg(r) => r,
        Value::Const(c) => {
            let idx = em.constant(c);
            let Value::Reg(r) = em.push(Op::Const(idx)) else { unreachable!() };
            r
        }
    };
    StraightLineProgram { constants: em.constants, ops: em.ops, output }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dixon::build_cayley_matrix;
    use crate::expand::expand_resultant;
    use crate::geometry::tests::octant_net;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_program() {
        let p = TrivariatePoly::from_terms(0, [([0, 0, 0], 7.0)]).unwrap();
        let slp = emit_slp(&p);
        assert_eq!(slp.ops(), &[Op::Const(0)]);
        assert_eq!((slp.multiplications(), slp.additions()), (0, 0));
        assert_eq!(slp.execute(Point3::ORIGIN), 7.0);
    }

    #[test]
    fn xy_plus_z_counts() {
        let p = TrivariatePoly::from_terms(2, [([1, 1, 0], 1.0), ([0, 0, 1], 1.0)]).unwrap();
        let slp = emit_slp(&p);
        assert_eq!(slp.multiplications(), 1);
        assert_eq!(slp.additions(), 1);
        assert_eq!(slp.execute(Point3 { x: 2.0, y: 3.0, z: 5.0 }), 11.0);
    }

    #[test]
    fn text_format_sample() {
        let p = TrivariatePoly::from_terms(2, [([2, 0, 0], 1.0), ([0, 0, 0], -1.0)]).unwrap();
        let text = emit_slp(&p).to_text();
        assert_eq!(text, "slp 1\nconst c0 = -1.0\nr0 = load x\nr1 = mul r0 r0\nr2 = add r1 c0\nout r2\n");
        assert_eq!(StraightLineProgram::parse(&text).unwrap(), emit_slp(&p));
    }

    #[test]
    fn parse_rejects_malformed() {
        for text in [
            "",
            "slp 2\nout r0\n",
            "slp 1\nr0 = add r1 r2\nout r0\n",
            "slp 1\nr1 = load x\nout r1\n",
            "slp 1\nconst c0 = 1.0\nr0 = load w\nout r0\n",
            "slp 1\nconst c1 = 1.0\nr0 = const c1\nout r0\n",
            "slp 1\nr0 = load x\n",
            "slp 1\nr0 = load x\nout r3\n",
        ] {
            assert!(StraightLineProgram::parse(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn octant_program_is_bit_identical() {
        let p = expand_resultant(&build_cayley_matrix(&octant_net()).unwrap()).unwrap();
        let slp = emit_slp(&p);
        let reparsed = StraightLineProgram::parse(&slp.to_text()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let q = Point3 { x: rng.gen_range(-2.0..2.0), y: rng.gen_range(-2.0..2.0), z: rng.gen_range(-2.0..2.0) };
            let want = p.evaluate(q).to_bits();
            assert_eq!(slp.execute(q).to_bits(), want);
            assert_eq!(reparsed.execute(q).to_bits(), want);
        }
    }
}
