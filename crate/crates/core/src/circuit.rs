//! Gate-level intermediate representation, statevector simulation and the
//! text serialization of circuits.
//!
//! Qubit `0` is the least significant bit of a basis-state index, i.e. basis
//! state `|b_{n-1} ... b_1 b_0>` has index `sum 2^k b_k`. Gates are stored in
//! application order: `gates[0]` acts first. (Hand-drawn circuit diagrams
//! elsewhere often read right-to-left; files written by this module read top
//! to bottom in application order, as the header comment in the format
//! states.)

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Default maximum register width the simulator will allocate.
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Simulator width cap; `QBN_MAX_QUBITS` overrides the default of 24.
pub fn max_qubits() -> usize {
    std::env::var("QBN_MAX_QUBITS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

/// Control polarity: `Positive` fires on |1> (the number operator `n`),
/// `Negative` on |0> (`n-bar`).
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn positive(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: Polarity::Negative,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum GateKind {
    /// `[[cos t, -sin t], [sin t, cos t]]`; maps |0> to cos t |0> + sin t |1>.
    RotY(f64),
    PauliX,
    PauliY,
    PauliZ,
    Hadamard,
    /// One y-rotation per control pattern. Angle index: bit `k` of the index
    /// is the state of `controls[k]`, so the first listed control is least
    /// significant.
    MultiplexedRotY(Vec<f64>),
}

#[derive(Clone, PartialEq, Debug)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn roty(theta: f64, target: usize) -> Self {
        Gate {
            kind: GateKind::RotY(theta),
            target,
            controls: Vec::new(),
        }
    }

    pub fn x(target: usize) -> Self {
        Gate {
            kind: GateKind::PauliX,
            target,
            controls: Vec::new(),
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::PauliX,
            target,
            controls: vec![Control::positive(control)],
        }
    }

    pub fn hadamard(target: usize) -> Self {
        Gate {
            kind: GateKind::Hadamard,
            target,
            controls: Vec::new(),
        }
    }

    /// Multiplexed y-rotation; `angles.len()` must be `2^controls.len()`.
    pub fn mux_roty(target: usize, controls: Vec<usize>, angles: Vec<f64>) -> Self {
        Gate {
            kind: GateKind::MultiplexedRotY(angles),
            target,
            controls: controls.into_iter().map(Control::positive).collect(),
        }
    }

    /// Same gate with all qubit indices renumbered.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind.clone(),
            target: map(self.target),
            controls: self
                .controls
                .iter()
                .map(|c| Control {
                    qubit: map(c.qubit),
                    polarity: c.polarity,
                })
                .collect(),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.target >= n_qubits {
            return Err(Error::Index(format!(
                "target {} out of range for {} qubits",
                self.target, n_qubits
            )));
        }
        let mut seen = vec![false; n_qubits];
        seen[self.target] = true;
        for c in &self.controls {
            if c.qubit >= n_qubits {
                return Err(Error::Index(format!(
                    "control {} out of range for {} qubits",
                    c.qubit, n_qubits
                )));
            }
            if seen[c.qubit] {
                return Err(Error::Index(format!(
                    "qubit {} used twice in one gate",
                    c.qubit
                )));
            }
            seen[c.qubit] = true;
        }
        if let GateKind::MultiplexedRotY(angles) = &self.kind {
            if angles.len() != 1 << self.controls.len() {
                return Err(Error::Index(format!(
                    "multiplexor with {} controls needs {} angles, got {}",
                    self.controls.len(),
                    1usize << self.controls.len(),
                    angles.len()
                )));
            }
            if angles.iter().any(|a| !a.is_finite()) {
                return Err(Error::Index("multiplexor angle not finite".into()));
            }
            if self.controls.iter().any(|c| c.polarity == Polarity::Negative) {
                return Err(Error::Index(
                    "multiplexor controls enumerate all patterns; polarity must be positive"
                        .into(),
                ));
            }
        }
        Ok(())
    }
}

/// Ordered gate list over a fixed register. List order is application order.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn count_cnots(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::PauliX) && !g.controls.is_empty())
            .count()
    }

    /// Dense matrix of the whole circuit, column `b` = circuit applied to
    /// basis state `b`. Intended for tests and unitarity checks at small
    /// widths.
    pub fn dense_unitary(&self) -> Result<nalgebra::DMatrix<Complex64>> {
        let dim = 1usize << self.n_qubits;
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let mut state = StateVector::basis(self.n_qubits, b)?;
            state.apply_circuit(self)?;
            for (i, amp) in state.amplitudes().iter().enumerate() {
                m[(i, b)] = *amp;
            }
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// Statevector
// ---------------------------------------------------------------------------

/// Complex amplitudes over `2^n_qubits` basis states.
#[derive(Clone, Debug)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// State |index> in the computational basis.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let cap = max_qubits();
        if n_qubits > cap {
            return Err(Error::Width {
                needed: n_qubits,
                cap,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn control_masks(&self, controls: &[Control]) -> (usize, usize) {
        let mut mask = 0usize;
        let mut value = 0usize;
        for c in controls {
            mask |= 1 << c.qubit;
            if c.polarity == Polarity::Positive {
                value |= 1 << c.qubit;
            }
        }
        (mask, value)
    }

    fn apply_2x2(
        &mut self,
        m: [[Complex64; 2]; 2],
        target: usize,
        ctrl_mask: usize,
        ctrl_value: usize,
    ) {
        let t = 1usize << target;
        for i in 0..self.amps.len() {
            if i & t != 0 || (i & ctrl_mask) != ctrl_value {
                continue;
            }
            let j = i | t;
            let a0 = self.amps[i];
            let a1 = self.amps[j];
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.validate(self.n_qubits)?;
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match &g.kind {
            GateKind::RotY(theta) => {
                let (c, s) = (theta.cos(), theta.sin());
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ];
                let (mask, value) = self.control_masks(&g.controls);
                self.apply_2x2(m, g.target, mask, value);
            }
            GateKind::PauliX => {
                let m = [[zero, one], [one, zero]];
                let (mask, value) = self.control_masks(&g.controls);
                self.apply_2x2(m, g.target, mask, value);
            }
            GateKind::PauliY => {
                let m = [
                    [zero, Complex64::new(0.0, -1.0)],
                    [Complex64::new(0.0, 1.0), zero],
                ];
                let (mask, value) = self.control_masks(&g.controls);
                self.apply_2x2(m, g.target, mask, value);
            }
            GateKind::PauliZ => {
                let m = [[one, zero], [zero, -one]];
                let (mask, value) = self.control_masks(&g.controls);
                self.apply_2x2(m, g.target, mask, value);
            }
            GateKind::Hadamard => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                let m = [[h, h], [h, -h]];
                let (mask, value) = self.control_masks(&g.controls);
                self.apply_2x2(m, g.target, mask, value);
            }
            GateKind::MultiplexedRotY(angles) => {
                self.apply_mux_roty(g.target, &g.controls, angles);
            }
        }
        Ok(())
    }

    /// Rotates the target by `angles[b]` in the subspace where the controls
    /// spell the pattern `b`.
    fn apply_mux_roty(&mut self, target: usize, controls: &[Control], angles: &[f64]) {
        let t = 1usize << target;
        let mut cs = Vec::with_capacity(angles.len());
        for a in angles {
            cs.push((a.cos(), a.sin()));
        }
        for i in 0..self.amps.len() {
            if i & t != 0 {
                continue;
            }
            let mut pattern = 0usize;
            for (k, c) in controls.iter().enumerate() {
                pattern |= ((i >> c.qubit) & 1) << k;
            }
            let (c, s) = cs[pattern];
            let j = i | t;
            let a0 = self.amps[i];
            let a1 = self.amps[j];
            self.amps[i] = c * a0 - s * a1;
            self.amps[j] = s * a0 + c * a1;
        }
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::Index(format!(
                "circuit over {} qubits applied to {}-qubit state",
                circuit.n_qubits(),
                self.n_qubits
            )));
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Exact marginal over the listed qubits; entry `p` of the result is the
    /// probability of the pattern whose bit `k` is the state of `qubits[k]`.
    pub fn marginal_distribution(&self, qubits: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, amp) in self.amps.iter().enumerate() {
            let mut pattern = 0usize;
            for (k, &q) in qubits.iter().enumerate() {
                pattern |= ((i >> q) & 1) << k;
            }
            out[pattern] += amp.norm_sqr();
        }
        out
    }

    /// Measures the listed qubits in the computational basis. Returns the
    /// packed outcome (bit `k` = state of `qubits[k]`) and collapses the
    /// state to the renormalized projection. Outcomes are selected by
    /// inverse-CDF over basis indices with strict `u < cumulative`.
    pub fn measure_subset(&mut self, qubits: &[usize], rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        let mut picked = None;
        let mut last_nonzero = 0usize;
        for (i, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 0.0 {
                last_nonzero = i;
            }
            cum += p;
            if u < cum {
                picked = Some(i);
                break;
            }
        }
        let picked = picked.unwrap_or(last_nonzero);
        let mut outcome = 0usize;
        for (k, &q) in qubits.iter().enumerate() {
            outcome |= ((picked >> q) & 1) << k;
        }
        // Collapse.
        let mut kept = 0.0;
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let mut pattern = 0usize;
            for (k, &q) in qubits.iter().enumerate() {
                pattern |= ((i >> q) & 1) << k;
            }
            if pattern == outcome {
                kept += amp.norm_sqr();
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        let scale = 1.0 / kept.sqrt();
        for amp in &mut self.amps {
            *amp *= scale;
        }
        outcome
    }
}

// ---------------------------------------------------------------------------
// Sparse execution
// ---------------------------------------------------------------------------

/// Sparse statevector over basis states with nonzero amplitude, kept sorted
/// by basis index. Semantically identical to [`StateVector`] (the unit tests
/// pin amplitudes and measurement outcomes to it bitwise); it exists because
/// a sweep-transition circuit driven from a basis state populates at most
/// `2^resamples` of its `2^width` amplitudes.
#[derive(Clone, Debug)]
pub(crate) struct SparseState {
    n_qubits: usize,
    amps: Vec<(usize, Complex64)>,
}

impl SparseState {
    pub(crate) fn basis(n_qubits: usize, index: usize) -> Self {
        SparseState {
            n_qubits,
            amps: vec![(index, Complex64::new(1.0, 0.0))],
        }
    }

    fn controls_satisfied(idx: usize, controls: &[Control]) -> bool {
        controls.iter().all(|c| {
            let bit = (idx >> c.qubit) & 1;
            match c.polarity {
                Polarity::Positive => bit == 1,
                Polarity::Negative => bit == 0,
            }
        })
    }

    /// Applies a y-rotation family: pairs `(i, i | t)` are brought adjacent
    /// by sorting on the index with the target bit cleared, rotated, and
    /// re-emitted in ascending index order. `angle_of` returns `None` where
    /// the gate acts as the identity.
    fn apply_rotation(&mut self, target: usize, angle_of: impl Fn(usize) -> Option<f64>) {
        let t = 1usize << target;
        self.amps
            .sort_unstable_by_key(|&(idx, _)| (idx & !t, idx & t));
        let mut out = Vec::with_capacity(self.amps.len() * 2);
        let mut k = 0;
        while k < self.amps.len() {
            let (idx, amp) = self.amps[k];
            let base = idx & !t;
            let (a0, a1) = if idx & t == 0 {
                if k + 1 < self.amps.len() && self.amps[k + 1].0 == base | t {
                    k += 2;
                    (amp, self.amps[k - 1].1)
                } else {
                    k += 1;
                    (amp, Complex64::new(0.0, 0.0))
                }
            } else {
                k += 1;
                (Complex64::new(0.0, 0.0), amp)
            };
            match angle_of(base) {
                Some(theta) => {
                    let (c, s) = (theta.cos(), theta.sin());
                    let b0 = c * a0 - s * a1;
                    let b1 = s * a0 + c * a1;
                    if b0 != Complex64::new(0.0, 0.0) {
                        out.push((base, b0));
                    }
                    if b1 != Complex64::new(0.0, 0.0) {
                        out.push((base | t, b1));
                    }
                }
                None => {
                    if a0 != Complex64::new(0.0, 0.0) {
                        out.push((base, a0));
                    }
                    if a1 != Complex64::new(0.0, 0.0) {
                        out.push((base | t, a1));
                    }
                }
            }
        }
        // Back to full-index order so measurement walks the same cumulative
        // path as the dense engine.
        out.sort_unstable_by_key(|&(idx, _)| idx);
        self.amps = out;
    }

    pub(crate) fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.validate(self.n_qubits)?;
        match &g.kind {
            GateKind::PauliX => {
                let t = 1usize << g.target;
                for (idx, _) in &mut self.amps {
                    if Self::controls_satisfied(*idx, &g.controls) {
                        *idx ^= t;
                    }
                }
                self.amps.sort_unstable_by_key(|&(idx, _)| idx);
            }
            GateKind::RotY(theta) => {
                let theta = *theta;
                let controls = g.controls.clone();
                self.apply_rotation(g.target, |base| {
                    Self::controls_satisfied(base, &controls).then_some(theta)
                });
            }
            GateKind::MultiplexedRotY(angles) => {
                let angles = angles.clone();
                let controls = g.controls.clone();
                self.apply_rotation(g.target, |base| {
                    let mut pattern = 0usize;
                    for (k, c) in controls.iter().enumerate() {
                        pattern |= ((base >> c.qubit) & 1) << k;
                    }
                    Some(angles[pattern])
                });
            }
            // The sweep-transition circuits never contain these; fall back
            // through the dense kernels is not worth carrying here.
            GateKind::PauliY | GateKind::PauliZ | GateKind::Hadamard => {
                return Err(Error::Index(format!(
                    "sparse path does not implement {:?}",
                    g.kind
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Same outcome semantics (and, for equal states and RNG, the same
    /// outcomes) as [`StateVector::measure_subset`], without collapsing.
    pub(crate) fn measure_subset(&self, qubits: &[usize], rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        let mut picked = None;
        let mut last_nonzero = 0usize;
        for &(idx, amp) in &self.amps {
            let p = amp.norm_sqr();
            if p > 0.0 {
                last_nonzero = idx;
            }
            cum += p;
            if u < cum {
                picked = Some(idx);
                break;
            }
        }
        let picked = picked.unwrap_or(last_nonzero);
        let mut outcome = 0usize;
        for (k, &q) in qubits.iter().enumerate() {
            outcome |= ((picked >> q) & 1) << k;
        }
        outcome
    }
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

impl Circuit {
    /// One gate per line, application order top to bottom:
    ///
    /// ```text
    /// QUBITS <n>
    /// ROTY <theta> t<target> [c<q>:+ c<q>:- ...]
    /// X|Y|Z|H t<target> [c<q>:+ ...]
    /// MUXROTY t<target> c<q0> c<q1> ... | <theta_0> <theta_1> ...
    /// ```
    ///
    /// Multiplexor angle index = decimal value of the control bits with the
    /// first listed control least significant.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("QUBITS {}\n", self.n_qubits));
        for g in &self.gates {
            match &g.kind {
                GateKind::RotY(theta) => {
                    out.push_str(&format!("ROTY {theta} t{}", g.target));
                    for c in &g.controls {
                        out.push_str(&format!(" {}", control_text(c)));
                    }
                }
                GateKind::PauliX | GateKind::PauliY | GateKind::PauliZ | GateKind::Hadamard => {
                    let name = match g.kind {
                        GateKind::PauliX => "X",
                        GateKind::PauliY => "Y",
                        GateKind::PauliZ => "Z",
                        GateKind::Hadamard => "H",
                        _ => unreachable!(),
                    };
                    out.push_str(&format!("{name} t{}", g.target));
                    for c in &g.controls {
                        out.push_str(&format!(" {}", control_text(c)));
                    }
                }
                GateKind::MultiplexedRotY(angles) => {
                    out.push_str(&format!("MUXROTY t{}", g.target));
                    for c in &g.controls {
                        out.push_str(&format!(" c{}", c.qubit));
                    }
                    out.push_str(" |");
                    for a in angles {
                        out.push_str(&format!(" {a}"));
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        });
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty circuit file".into()))?;
        let n_qubits = header
            .trim()
            .strip_prefix("QUBITS ")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse(format!("expected `QUBITS <n>` header, got `{header}`")))?;
        let mut circuit = Circuit::new(n_qubits);
        for (lineno, line) in lines {
            let gate = parse_gate_line(line.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            circuit
                .push(gate)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(circuit)
    }
}

fn control_text(c: &Control) -> String {
    let sign = match c.polarity {
        Polarity::Positive => '+',
        Polarity::Negative => '-',
    };
    format!("c{}:{sign}", c.qubit)
}

fn parse_target(tok: &str) -> std::result::Result<usize, String> {
    tok.strip_prefix('t')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("expected t<qubit>, got `{tok}`"))
}

fn parse_control(tok: &str) -> std::result::Result<Control, String> {
    let body = tok
        .strip_prefix('c')
        .ok_or_else(|| format!("expected c<qubit>:<+|->, got `{tok}`"))?;
    let (q, pol) = body
        .split_once(':')
        .ok_or_else(|| format!("expected c<qubit>:<+|->, got `{tok}`"))?;
    let qubit = q.parse().map_err(|_| format!("bad control qubit `{q}`"))?;
    let polarity = match pol {
        "+" => Polarity::Positive,
        "-" => Polarity::Negative,
        other => return Err(format!("bad polarity `{other}`")),
    };
    Ok(Control { qubit, polarity })
}

fn parse_gate_line(line: &str) -> std::result::Result<Gate, String> {
    let mut toks = line.split_whitespace();
    let op = toks.next().ok_or("empty gate line")?;
    match op {
        "ROTY" => {
            let theta: f64 = toks
                .next()
                .ok_or("ROTY missing angle")?
                .parse()
                .map_err(|_| "bad ROTY angle".to_string())?;
            let target = parse_target(toks.next().ok_or("ROTY missing target")?)?;
            let controls = toks.map(parse_control).collect::<std::result::Result<_, _>>()?;
            Ok(Gate {
                kind: GateKind::RotY(theta),
                target,
                controls,
            })
        }
        "X" | "Y" | "Z" | "H" => {
            let kind = match op {
                "X" => GateKind::PauliX,
                "Y" => GateKind::PauliY,
                "Z" => GateKind::PauliZ,
                _ => GateKind::Hadamard,
            };
            let target = parse_target(toks.next().ok_or("missing target")?)?;
            let controls = toks.map(parse_control).collect::<std::result::Result<_, _>>()?;
            Ok(Gate {
                kind,
                target,
                controls,
            })
        }
        "MUXROTY" => {
            let target = parse_target(toks.next().ok_or("MUXROTY missing target")?)?;
            let mut controls = Vec::new();
            let mut saw_bar = false;
            let mut angles = Vec::new();
            for tok in toks {
                if tok == "|" {
                    saw_bar = true;
                    continue;
                }
                if saw_bar {
                    angles.push(tok.parse().map_err(|_| format!("bad angle `{tok}`"))?);
                } else {
                    let q = tok
                        .strip_prefix('c')
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| format!("expected c<qubit>, got `{tok}`"))?;
                    controls.push(Control::positive(q));
                }
            }
            if !saw_bar {
                return Err("MUXROTY missing `|` separator".into());
            }
            Ok(Gate {
                kind: GateKind::MultiplexedRotY(angles),
                target,
                controls,
            })
        }
        other => Err(format!("unknown gate `{other}`")),
    }
}
