//! Pauli strings in binary symplectic form.
//!
//! An n-qubit Pauli operator is stored as two length-n bit vectors plus a
//! power of i: the string represents `i^phase · ⊗_i σ_i`, where the letter
//! on qubit i is read off the bit pair `(x_i, z_i)` as I=(0,0), X=(1,0),
//! Z=(0,1), Y=(1,1). Products, commutation, and Clifford conjugation are a
//! handful of word-level XOR/AND/popcount operations; the phase bookkeeping
//! uses the normal form `⊗σ = i^{|x∧z|} X^x Z^z`.
//!
//! The flat symplectic encoding ([`symplectic_vector`]
//! (PauliString::symplectic_vector)) puts all X bits first and all Z bits
//! second, so two operators commute exactly when the symplectic product of
//! their vectors vanishes.

use crate::gf2::BitVector;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    #[must_use]
    pub fn from_xz(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliOp::I,
            (true, false) => PauliOp::X,
            (true, true) => PauliOp::Y,
            (false, true) => PauliOp::Z,
        }
    }

    #[must_use]
    pub fn xz(self) -> (bool, bool) {
        match self {
            PauliOp::I => (false, false),
            PauliOp::X => (true, false),
            PauliOp::Y => (true, true),
            PauliOp::Z => (false, true),
        }
    }

    #[must_use]
    pub fn letter(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    #[must_use]
    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }
}

/// An n-qubit Pauli operator with phase: `i^phase · ⊗_i σ_i`.
///
/// `phase` is kept mod 4; Hermitian operators are exactly those with an
/// even phase (sign ±1).
#[derive(Clone, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: BitVector,
    z: BitVector,
    phase: u8,
}

impl PauliString {
    #[must_use]
    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
            phase: 0,
        }
    }

    /// The operator acting as `op` on `qubit` and identity elsewhere.
    #[must_use]
    pub fn single(n: usize, qubit: usize, op: PauliOp) -> Self {
        let mut p = Self::identity(n);
        p.set_op(qubit, op);
        p
    }

    #[must_use]
    pub fn from_ops(ops: &[PauliOp]) -> Self {
        let mut p = Self::identity(ops.len());
        for (i, &op) in ops.iter().enumerate() {
            p.set_op(i, op);
        }
        p
    }

    /// Assemble from raw bit planes. Lengths must agree; `phase` is mod 4.
    #[must_use]
    pub fn from_xz(x: BitVector, z: BitVector, phase: u8) -> Self {
        assert_eq!(x.len(), z.len(), "x/z bit planes differ in length");
        PauliString {
            n: x.len(),
            x,
            z,
            phase: phase % 4,
        }
    }

    #[must_use]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Power of i in front of the letter product, mod 4.
    #[must_use]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    #[must_use]
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Sign of a Hermitian operator: +1 for phase 0, -1 for phase 2.
    /// Panics on an anti-Hermitian phase.
    #[must_use]
    pub fn sign(&self) -> i8 {
        match self.phase {
            0 => 1,
            2 => -1,
            p => panic!("sign() on non-Hermitian operator (phase i^{p})"),
        }
    }

    #[must_use]
    pub fn op_at(&self, qubit: usize) -> PauliOp {
        PauliOp::from_xz(self.x.get(qubit), self.z.get(qubit))
    }

    pub fn set_op(&mut self, qubit: usize, op: PauliOp) {
        let (x, z) = op.xz();
        self.x.set(qubit, x);
        self.z.set(qubit, z);
    }

    #[must_use]
    pub fn x_bits(&self) -> &BitVector {
        &self.x
    }

    #[must_use]
    pub fn z_bits(&self) -> &BitVector {
        &self.z
    }

    /// Bit i set iff the letter on qubit i is not identity.
    #[must_use]
    pub fn support(&self) -> BitVector {
        let mut s = self.x.clone();
        s.or_assign(&self.z);
        s
    }

    /// Number of non-identity letters.
    #[must_use]
    pub fn weight(&self) -> usize {
        self.support().count_ones()
    }

    /// Identity operator with trivial phase?
    #[must_use]
    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.x.is_zero() && self.z.is_zero()
    }

    /// True when the letter parts are identity regardless of phase.
    #[must_use]
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn mul_phase(&mut self, i_power: u8) {
        self.phase = (self.phase + i_power) % 4;
    }

    pub fn negate(&mut self) {
        self.mul_phase(2);
    }

    /// The same letters with the phase reset to `+1`.
    #[must_use]
    pub fn without_phase(mut self) -> PauliString {
        self.phase = 0;
        self
    }

    /// Do the two operators commute? Phases never matter here.
    #[must_use]
    pub fn commutes(&self, other: &PauliString) -> bool {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// Operator product `self · other`, phase included.
    #[must_use]
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        // Via the normal form i^{|x∧z|} X^x Z^z: commuting Z^{z1} past
        // X^{x2} costs (-1)^{⟨z1,x2⟩}.
        let y_p = count_and(&self.x, &self.z);
        let y_q = count_and(&other.x, &other.z);
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        let y_r = count_and(&x, &z);
        let anti = if self.z.dot(&other.x) { 2u8 } else { 0 };
        let phase = (self.phase as u32
            + other.phase as u32
            + y_p
            + y_q
            + anti as u32
            + (4 - y_r % 4))
            % 4;
        PauliString {
            n: self.n,
            x,
            z,
            phase: phase as u8,
        }
    }

    // ----- Clifford conjugation, one gate at a time -----
    //
    // Each rule maps P to U P U†. The sign flip is decided from the bits
    // before the update; a flip adds i^2.

    pub fn conj_h(&mut self, q: usize) {
        if self.x.get(q) && self.z.get(q) {
            self.negate();
        }
        let (xb, zb) = (self.x.get(q), self.z.get(q));
        self.x.set(q, zb);
        self.z.set(q, xb);
    }

    pub fn conj_s(&mut self, q: usize) {
        if self.x.get(q) && self.z.get(q) {
            self.negate();
        }
        if self.x.get(q) {
            self.z.toggle(q);
        }
    }

    pub fn conj_sdg(&mut self, q: usize) {
        if self.x.get(q) && !self.z.get(q) {
            self.negate();
        }
        if self.x.get(q) {
            self.z.toggle(q);
        }
    }

    pub fn conj_x(&mut self, q: usize) {
        if self.z.get(q) {
            self.negate();
        }
    }

    pub fn conj_y(&mut self, q: usize) {
        if self.x.get(q) ^ self.z.get(q) {
            self.negate();
        }
    }

    pub fn conj_z(&mut self, q: usize) {
        if self.x.get(q) {
            self.negate();
        }
    }

    pub fn conj_cnot(&mut self, control: usize, target: usize) {
        let (xc, zc) = (self.x.get(control), self.z.get(control));
        let (xt, zt) = (self.x.get(target), self.z.get(target));
        if xc && zt && !(xt ^ zc) {
            self.negate();
        }
        self.x.set(target, xt ^ xc);
        self.z.set(control, zc ^ zt);
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let (xa, za) = (self.x.get(a), self.z.get(a));
        let (xb, zb) = (self.x.get(b), self.z.get(b));
        if xa && xb && (za ^ zb) {
            self.negate();
        }
        self.z.set(a, za ^ xb);
        self.z.set(b, zb ^ xa);
    }

    pub fn conj_swap(&mut self, a: usize, b: usize) {
        self.x.swap_bits(a, b);
        self.z.swap_bits(a, b);
    }

    /// Flat symplectic encoding: X bits in positions 0..n, Z bits in n..2n.
    /// The phase is not part of the encoding.
    #[must_use]
    pub fn symplectic_vector(&self) -> BitVector {
        self.x.concat(&self.z)
    }

    /// Rebuild from a flat `[X | Z]` vector with trivial phase.
    #[must_use]
    pub fn from_symplectic(v: &BitVector) -> PauliString {
        assert!(v.len() % 2 == 0, "symplectic vector must have even length");
        let n = v.len() / 2;
        let mut x = BitVector::zeros(n);
        let mut z = BitVector::zeros(n);
        for i in v.iter_ones() {
            if i < n {
                x.set(i, true);
            } else {
                z.set(i - n, true);
            }
        }
        PauliString { n, x, z, phase: 0 }
    }
}

fn count_and(a: &BitVector, b: &BitVector) -> u32 {
    (a.masked(b).count_ones() % 4) as u32
}

/// Symplectic product of two flat `[X | Z]` vectors: 1 exactly when the
/// encoded operators anticommute.
#[must_use]
pub fn symplectic_product(a: &BitVector, b: &BitVector) -> bool {
    assert_eq!(a.len(), b.len(), "length mismatch");
    assert!(a.len() % 2 == 0, "symplectic vectors must have even length");
    let n = a.len() / 2;
    let mut swapped = BitVector::zeros(2 * n);
    for i in b.iter_ones() {
        swapped.set(if i < n { i + n } else { i - n }, true);
    }
    a.dot(&swapped)
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            3 => "-i",
            _ => unreachable!(),
        };
        write!(f, "{prefix}")?;
        for i in 0..self.n {
            write!(f, "{}", self.op_at(i).letter())?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

impl std::str::FromStr for PauliString {
    type Err = crate::Error;

    /// Accepts an optional sign/phase prefix (`+`, `-`, `i`, `+i`, `-i`)
    /// followed by letters from IXYZ, qubit 0 first.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut phase = 0u8;
        let mut rest = s;
        if let Some(r) = rest.strip_prefix('-') {
            phase = 2;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        if let Some(r) = rest.strip_prefix('i') {
            phase = (phase + 1) % 4;
            rest = r;
        }
        let ops: Option<Vec<PauliOp>> = rest.chars().map(PauliOp::from_letter).collect();
        let ops = ops.ok_or_else(|| {
            crate::Error::invalid(format!("invalid Pauli string {s:?}: letters must be I/X/Y/Z"))
        })?;
        if ops.is_empty() {
            return Err(crate::Error::invalid("empty Pauli string"));
        }
        let mut p = PauliString::from_ops(&ops);
        p.mul_phase(phase);
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallmat::{self, C, MAT_I, MAT_X, MAT_Y, MAT_Z};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn i_pow(k: u8) -> C {
        match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Dense matrix of a string, qubit 0 on the least significant bit.
    fn dense(p: &PauliString) -> Vec<C> {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        let mut dim = 1usize;
        for q in 0..p.n_qubits() {
            let m = match p.op_at(q) {
                PauliOp::I => MAT_I,
                PauliOp::X => MAT_X,
                PauliOp::Y => MAT_Y,
                PauliOp::Z => MAT_Z,
            };
            acc = smallmat::kron(2, &m, dim, &acc);
            dim *= 2;
        }
        smallmat::scale(i_pow(p.phase()), &acc)
    }

    fn assert_dense_eq(a: &[C], b: &[C], ctx: &str) {
        assert!(
            smallmat::max_abs_diff(a, b) < 1e-12,
            "dense mismatch: {ctx}"
        );
    }

    const LETTERS: [PauliOp; 4] = [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z];

    #[test]
    fn product_phases_on_one_qubit() {
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        assert_eq!(x.mul(&z).to_string(), "-iY");
        assert_eq!(z.mul(&x).to_string(), "+iY");
        assert_eq!(y.mul(&y).to_string(), "+I");
    }

    #[test]
    fn products_match_dense_on_all_letter_pairs() {
        for &a in &LETTERS {
            for &b in &LETTERS {
                let p = PauliString::from_ops(&[a]);
                let q = PauliString::from_ops(&[b]);
                let got = dense(&p.mul(&q));
                let want = smallmat::matmul(2, &dense(&p), &dense(&q));
                assert_dense_eq(&got, &want, &format!("{a:?}·{b:?}"));
            }
        }
    }

    #[test]
    fn products_match_dense_on_three_qubit_strings() {
        let strings = ["XYZ", "ZZI", "IYX", "YYY", "XIZ"];
        for a in strings {
            for b in strings {
                let p: PauliString = a.parse().unwrap();
                let q: PauliString = b.parse().unwrap();
                let got = dense(&p.mul(&q));
                let want = smallmat::matmul(8, &dense(&p), &dense(&q));
                assert_dense_eq(&got, &want, &format!("{a}·{b}"));
            }
        }
    }

    #[test]
    fn commutation_matches_dense() {
        let strings = ["XX", "XY", "ZI", "IZ", "YZ", "YY", "XZ", "II"];
        for a in strings {
            for b in strings {
                let p: PauliString = a.parse().unwrap();
                let q: PauliString = b.parse().unwrap();
                let pq = smallmat::matmul(4, &dense(&p), &dense(&q));
                let qp = smallmat::matmul(4, &dense(&q), &dense(&p));
                let commute_dense = smallmat::max_abs_diff(&pq, &qp) < 1e-12;
                assert_eq!(p.commutes(&q), commute_dense, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn symplectic_layout_x_first_z_second() {
        let p = PauliString::single(3, 0, PauliOp::X);
        let v = p.symplectic_vector();
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0]);
        let q = PauliString::single(3, 2, PauliOp::Z);
        assert_eq!(q.symplectic_vector().iter_ones().collect::<Vec<_>>(), vec![5]);
        let y = PauliString::single(3, 1, PauliOp::Y);
        assert_eq!(y.symplectic_vector().iter_ones().collect::<Vec<_>>(), vec![1, 4]);
    }

    #[test]
    fn symplectic_product_detects_anticommutation() {
        let x = PauliString::single(2, 0, PauliOp::X).symplectic_vector();
        let z0 = PauliString::single(2, 0, PauliOp::Z).symplectic_vector();
        let z1 = PauliString::single(2, 1, PauliOp::Z).symplectic_vector();
        assert!(symplectic_product(&x, &z0));
        assert!(!symplectic_product(&x, &z1));
        assert!(!symplectic_product(&x, &x));
    }

    #[test]
    fn support_and_weight() {
        let p: PauliString = "IXYZI".parse().unwrap();
        assert_eq!(p.weight(), 3);
        assert_eq!(p.support().iter_ones().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn display_round_trip() {
        for s in ["+XYZ", "-IZ", "+iXX", "-iY"] {
            let p: PauliString = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
    }

    // Dense single-qubit gate matrices for the conjugation oracle.
    fn gate_dense_1q(name: &str) -> [C; 4] {
        let h = 1.0 / 2f64.sqrt();
        match name {
            "H" => [
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(-h, 0.0),
            ],
            "S" => [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 1.0),
            ],
            "SDG" => [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
            ],
            "X" => MAT_X,
            "Y" => MAT_Y,
            "Z" => MAT_Z,
            _ => panic!("unknown gate {name}"),
        }
    }

    fn embed_1q(n: usize, q: usize, m: &[C; 4]) -> Vec<C> {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        let mut dim = 1usize;
        for i in 0..n {
            let factor: Vec<C> = if i == q { m.to_vec() } else { MAT_I.to_vec() };
            acc = smallmat::kron(2, &factor, dim, &acc);
            dim *= 2;
        }
        acc
    }

    /// Dense operator from a basis-permutation with per-basis phase,
    /// qubit 0 = least significant bit.
    fn dense_from_action(n: usize, f: impl Fn(usize) -> (usize, C)) -> Vec<C> {
        let dim = 1 << n;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for b in 0..dim {
            let (out, ph) = f(b);
            m[out * dim + b] = ph;
        }
        m
    }

    fn check_conj(
        n: usize,
        u: &[C],
        apply: impl Fn(&mut PauliString),
        ops: &[PauliOp],
        ctx: &str,
    ) {
        let p = PauliString::from_ops(ops);
        let mut conj = p.clone();
        apply(&mut conj);
        assert!(conj.is_hermitian(), "{ctx}: conjugate must stay Hermitian");
        let dim = 1 << n;
        let udg = smallmat::dagger(dim, u);
        let want = smallmat::matmul(dim, u, &smallmat::matmul(dim, &dense(&p), &udg));
        assert_dense_eq(&dense(&conj), &want, ctx);
    }

    #[test]
    fn single_qubit_conjugation_matches_dense() {
        type Apply = fn(&mut PauliString);
        let gates: [(&str, Apply); 6] = [
            ("H", |p| p.conj_h(0)),
            ("S", |p| p.conj_s(0)),
            ("SDG", |p| p.conj_sdg(0)),
            ("X", |p| p.conj_x(0)),
            ("Y", |p| p.conj_y(0)),
            ("Z", |p| p.conj_z(0)),
        ];
        for (name, apply) in gates {
            let u = gate_dense_1q(name).to_vec();
            for &op in &LETTERS {
                check_conj(1, &u, apply, &[op], &format!("{name} on {op:?}"));
            }
        }
    }

    #[test]
    fn two_qubit_conjugation_matches_dense() {
        let one = Complex64::new(1.0, 0.0);
        // control = qubit 0, target = qubit 1
        let cnot01 = dense_from_action(2, |b| {
            let flip = (b & 1) << 1;
            (b ^ flip, one)
        });
        let cnot10 = dense_from_action(2, |b| {
            let flip = (b >> 1) & 1;
            (b ^ flip, one)
        });
        let cz = dense_from_action(2, |b| {
            let ph = if b & 1 == 1 && b & 2 == 2 { -one } else { one };
            (b, ph)
        });
        let swap = dense_from_action(2, |b| {
            let (lo, hi) = (b & 1, (b >> 1) & 1);
            (lo << 1 | hi, one)
        });
        for &a in &LETTERS {
            for &b in &LETTERS {
                let ops = [a, b];
                check_conj(2, &cnot01, |p| p.conj_cnot(0, 1), &ops, &format!("CNOT01 {a:?}{b:?}"));
                check_conj(2, &cnot10, |p| p.conj_cnot(1, 0), &ops, &format!("CNOT10 {a:?}{b:?}"));
                check_conj(2, &cz, |p| p.conj_cz(0, 1), &ops, &format!("CZ {a:?}{b:?}"));
                check_conj(2, &cz, |p| p.conj_cz(1, 0), &ops, &format!("CZ(rev) {a:?}{b:?}"));
                check_conj(2, &swap, |p| p.conj_swap(0, 1), &ops, &format!("SWAP {a:?}{b:?}"));
            }
        }
    }

    #[test]
    fn known_conjugation_signs() {
        // CNOT maps Y⊗Y to -X⊗Z (control first).
        let mut p: PauliString = "YY".parse().unwrap();
        p.conj_cnot(0, 1);
        assert_eq!(p.to_string(), "-XZ");
        // S maps X to Y, then Y to -X.
        let mut q: PauliString = "X".parse().unwrap();
        q.conj_s(0);
        assert_eq!(q.to_string(), "+Y");
        q.conj_s(0);
        assert_eq!(q.to_string(), "-X");
    }

    #[test]
    fn sdg_inverts_s() {
        for &op in &LETTERS {
            let mut p = PauliString::from_ops(&[op]);
            p.conj_s(0);
            p.conj_sdg(0);
            assert_eq!(p, PauliString::from_ops(&[op]), "{op:?}");
        }
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (
            proptest::collection::vec(0usize..4, n),
            0u8..4,
        )
            .prop_map(move |(ls, ph)| {
                let ops: Vec<PauliOp> = ls
                    .iter()
                    .map(|&k| [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z][k])
                    .collect();
                let mut p = PauliString::from_ops(&ops);
                p.mul_phase(ph);
                p
            })
    }

    proptest! {
        #[test]
        fn prop_mul_associative(a in arb_pauli(3), b in arb_pauli(3), c in arb_pauli(3)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn prop_hermitian_squares_to_identity(a in arb_pauli(4)) {
            prop_assume!(a.is_hermitian());
            prop_assert!(a.mul(&a).is_identity());
        }

        #[test]
        fn prop_commutes_symmetric(a in arb_pauli(4), b in arb_pauli(4)) {
            prop_assert_eq!(a.commutes(&b), b.commutes(&a));
        }

        #[test]
        fn prop_symplectic_product_agrees_with_commutes(a in arb_pauli(5), b in arb_pauli(5)) {
            prop_assert_eq!(
                symplectic_product(&a.symplectic_vector(), &b.symplectic_vector()),
                !a.commutes(&b)
            );
        }

        #[test]
        fn prop_symplectic_round_trip(a in arb_pauli(5)) {
            let v = a.symplectic_vector();
            let back = PauliString::from_symplectic(&v);
            prop_assert_eq!(back.x_bits(), a.x_bits());
            prop_assert_eq!(back.z_bits(), a.z_bits());
        }

        #[test]
        fn prop_conjugation_preserves_commutation(
            a in arb_pauli(3),
            b in arb_pauli(3),
            gates in proptest::collection::vec((0usize..9, 0usize..3, 0usize..3), 0..12)
        ) {
            let mut ca = a.clone();
            let mut cb = b.clone();
            for (g, q1, q2) in gates {
                let q2 = if q2 == q1 { (q2 + 1) % 3 } else { q2 };
                for p in [&mut ca, &mut cb] {
                    match g {
                        0 => p.conj_h(q1),
                        1 => p.conj_s(q1),
                        2 => p.conj_sdg(q1),
                        3 => p.conj_x(q1),
                        4 => p.conj_y(q1),
                        5 => p.conj_z(q1),
                        6 => p.conj_cnot(q1, q2),
                        7 => p.conj_cz(q1, q2),
                        _ => p.conj_swap(q1, q2),
                    }
                }
            }
            prop_assert_eq!(a.commutes(&b), ca.commutes(&cb));
        }
    }
}
