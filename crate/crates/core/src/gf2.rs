//! Bit-packed linear algebra over GF(2).
//!
//! Everything downstream — commutation tests, centralizers, depolarization
//! flags, the IQP basis converter — reduces to rank, nullspace, membership,
//! and column-reduction questions about small-to-middling binary matrices.
//! Rows are packed 64 bits per word. Elimination pivots are chosen
//! deterministically (columns left to right, first available row), so every
//! derived object is reproducible across runs and thread counts.
//!
//! Zero-row and zero-column matrices are legal inputs everywhere.

// ========== Bit vectors ==========

/// A fixed-length vector over GF(2), packed into 64-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    /// All-zero vector of length `len`.
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        BitVector {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Vector with exactly bit `i` set.
    #[must_use]
    pub fn singleton(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    #[must_use]
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parse from a string of `0`/`1` characters, index 0 first.
    #[must_use]
    pub fn from_bits_str(s: &str) -> Self {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => false,
                '1' => true,
                _ => panic!("bit string may contain only 0 and 1, got {c:?}"),
            })
            .collect();
        Self::from_bools(&bits)
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[must_use]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn swap_bits(&mut self, i: usize, j: usize) {
        let (a, b) = (self.get(i), self.get(j));
        self.set(i, b);
        self.set(j, a);
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of set bits.
    #[must_use]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// XOR `other` into `self`. Lengths must match.
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// OR `other` into `self`. Lengths must match.
    pub fn or_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in or");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// XOR restricted to the word range `[lo, hi]` (inclusive); used by the
    /// elimination engine, which tracks each row's active span.
    pub(crate) fn xor_assign_words(&mut self, other: &BitVector, lo: usize, hi: usize) {
        debug_assert_eq!(self.len, other.len);
        for w in lo..=hi.min(self.words.len().saturating_sub(1)) {
            self.words[w] ^= other.words[w];
        }
    }

    /// Parity of the AND with `other` — the GF(2) dot product.
    #[must_use]
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    /// Index of the lowest set bit, if any.
    #[must_use]
    pub fn first_one(&self) -> Option<usize> {
        self.first_one_at_or_after(0)
    }

    /// Lowest set bit with index >= `bit`, if any.
    #[must_use]
    pub fn first_one_at_or_after(&self, bit: usize) -> Option<usize> {
        if bit >= self.len {
            return None;
        }
        let w0 = bit / 64;
        let head = self.words[w0] & (!0u64 << (bit % 64));
        if head != 0 {
            return Some(w0 * 64 + head.trailing_zeros() as usize);
        }
        for w in w0 + 1..self.words.len() {
            if self.words[w] != 0 {
                return Some(w * 64 + self.words[w].trailing_zeros() as usize);
            }
        }
        None
    }

    /// Index of the highest set bit, if any.
    #[must_use]
    pub fn last_one(&self) -> Option<usize> {
        for w in (0..self.words.len()).rev() {
            if self.words[w] != 0 {
                return Some(w * 64 + 63 - self.words[w].leading_zeros() as usize);
            }
        }
        None
    }

    /// Iterate indices of set bits in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    return None;
                }
                let b = rem.trailing_zeros() as usize;
                rem &= rem - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Concatenation `self ++ other`.
    #[must_use]
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Keep only the bits selected by `mask` (bitwise AND).
    #[must_use]
    pub fn masked(&self, mask: &BitVector) -> BitVector {
        assert_eq!(self.len, mask.len, "length mismatch in mask");
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&mask.words) {
            *a &= b;
        }
        out
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn last_word_nonzero(&self) -> usize {
        for w in (0..self.words.len()).rev() {
            if self.words[w] != 0 {
                return w;
            }
        }
        0
    }
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

// ========== Matrices ==========

/// A row-major matrix over GF(2). Rows all share one column count; a matrix
/// may have zero rows or zero columns.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: Vec<BitVector>,
    n_cols: usize,
}

impl Gf2Matrix {
    #[must_use]
    pub fn new(n_cols: usize) -> Self {
        Gf2Matrix {
            rows: Vec::new(),
            n_cols,
        }
    }

    #[must_use]
    pub fn from_rows(rows: Vec<BitVector>, n_cols: usize) -> Self {
        for r in &rows {
            assert_eq!(r.len(), n_cols, "row length does not match column count");
        }
        Gf2Matrix { rows, n_cols }
    }

    /// Build from `0`/`1` strings, one row per string.
    #[must_use]
    pub fn from_bits_strs(rows: &[&str]) -> Self {
        assert!(!rows.is_empty(), "use Gf2Matrix::new for zero-row matrices");
        let n_cols = rows[0].len();
        Self::from_rows(rows.iter().map(|s| BitVector::from_bits_str(s)).collect(), n_cols)
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        Self::from_rows((0..n).map(|i| BitVector::singleton(n, i)).collect(), n)
    }

    #[must_use]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[must_use]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[must_use]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.n_cols, "row length does not match column count");
        self.rows.push(row);
    }

    /// Matrix–vector product `M·v`; the result has one bit per row.
    #[must_use]
    pub fn mul_vector(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.n_cols, "vector length does not match column count");
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        out
    }

    /// Rank via deterministic elimination.
    #[must_use]
    pub fn rank(&self) -> usize {
        Echelon::from_rows(self.n_cols, self.rows.iter().cloned()).rank()
    }

    /// A basis for `{v : M·v = 0}`, one vector per row of the result,
    /// ordered by ascending free column. The basis has `n_cols - rank(M)`
    /// rows; a zero-column matrix yields an empty basis.
    #[must_use]
    pub fn nullspace_basis(&self) -> Gf2Matrix {
        let mut ech = Echelon::from_rows(self.n_cols, self.rows.iter().cloned());
        ech.finalize_rref();
        Gf2Matrix::from_rows(ech.nullspace_basis(), self.n_cols)
    }

    /// Is `v` in the row space? The zero vector always is.
    #[must_use]
    pub fn row_space_membership(&self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.n_cols, "vector length does not match column count");
        Echelon::from_rows(self.n_cols, self.rows.iter().cloned()).contains(v)
    }

    /// The subset of rows, in original order, that each add rank — a basis
    /// of the row space drawn from the rows themselves.
    #[must_use]
    pub fn independent_rows(&self) -> Gf2Matrix {
        let mut ech = Echelon::new(self.n_cols);
        let mut kept = Vec::new();
        for row in &self.rows {
            if ech.insert(row.clone()) {
                kept.push(row.clone());
            }
        }
        Gf2Matrix::from_rows(kept, self.n_cols)
    }

    /// Gauss–Jordan reduction by column operations only. Returns the reduced
    /// matrix together with the ordered operation list; replaying the list on
    /// the input reproduces the reduction exactly. When the rows are
    /// independent the result is `[I | 0]`.
    #[must_use]
    pub fn column_reduce_with_ops(&self) -> (Gf2Matrix, Vec<ColumnOp>) {
        let mut m = self.clone();
        let mut ops = Vec::new();
        let mut next_pivot = 0usize;
        for r in 0..m.rows.len() {
            if next_pivot >= m.n_cols {
                break;
            }
            // Find a pivot for row r among columns not yet claimed.
            let Some(j) = (next_pivot..m.n_cols).find(|&j| m.rows[r].get(j)) else {
                continue; // dependent row: support only on claimed columns
            };
            if j != next_pivot {
                for row in &mut m.rows {
                    row.swap_bits(next_pivot, j);
                }
                ops.push(ColumnOp::Swap(next_pivot, j));
            }
            // Clear every other set bit of row r by adding the pivot column.
            let targets: Vec<usize> =
                m.rows[r].iter_ones().filter(|&k| k != next_pivot).collect();
            for k in targets {
                for row in &mut m.rows {
                    if row.get(next_pivot) {
                        row.toggle(k);
                    }
                }
                ops.push(ColumnOp::Add {
                    target: k,
                    source: next_pivot,
                });
            }
            next_pivot += 1;
        }
        (m, ops)
    }

    /// Replay a column-operation list (as recorded by
    /// [`column_reduce_with_ops`](Self::column_reduce_with_ops)).
    #[must_use]
    pub fn apply_column_ops(&self, ops: &[ColumnOp]) -> Gf2Matrix {
        let mut m = self.clone();
        for op in ops {
            match *op {
                ColumnOp::Swap(i, j) => {
                    for row in &mut m.rows {
                        row.swap_bits(i, j);
                    }
                }
                ColumnOp::Add { target, source } => {
                    for row in &mut m.rows {
                        if row.get(source) {
                            row.toggle(target);
                        }
                    }
                }
            }
        }
        m
    }
}

impl std::fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.rows.len(), self.n_cols)?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        write!(f, "]")
    }
}

/// One recorded column operation: `Swap(i, j)` exchanges columns, `Add`
/// replaces the target column with target ⊕ source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnOp {
    Swap(usize, usize),
    Add { target: usize, source: usize },
}

// ========== Elimination engine ==========

/// Incremental row-echelon accumulator.
///
/// Rows are inserted one at a time, reduced against the pivots already
/// present, and kept sorted by pivot column. Every row's leading bit is its
/// pivot, and no inserted row disturbs the rows before it, so rank and
/// membership queries are available at any point. [`finalize_rref`]
/// (Echelon::finalize_rref) back-substitutes to the unique reduced form,
/// which [`nullspace_basis`](Echelon::nullspace_basis) reads off directly.
///
/// Each row carries its last active word, so reductions on banded input
/// (e.g. propagated noise operators of a 1D circuit) only touch a constant
/// number of words per pivot.
pub struct Echelon {
    n_cols: usize,
    rows: Vec<BitVector>,
    /// rows[i] has leading bit pivots[i]; strictly increasing.
    pivots: Vec<usize>,
    /// Last word index with any set bit, per row.
    ends: Vec<usize>,
    reduced: bool,
}

impl Echelon {
    #[must_use]
    pub fn new(n_cols: usize) -> Self {
        Echelon {
            n_cols,
            rows: Vec::new(),
            pivots: Vec::new(),
            ends: Vec::new(),
            reduced: true,
        }
    }

    pub fn from_rows(n_cols: usize, rows: impl IntoIterator<Item = BitVector>) -> Self {
        let mut e = Self::new(n_cols);
        for r in rows {
            e.insert(r);
        }
        e
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    #[must_use]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    /// Last active word per row, aligned with [`rows`](Echelon::rows); lets
    /// callers skip rows that cannot overlap a given word range.
    pub(crate) fn row_ends(&self) -> &[usize] {
        &self.ends
    }

    /// Insert a row; returns true if it was independent of the rows so far
    /// (and thus increased the rank).
    pub fn insert(&mut self, row: BitVector) -> bool {
        assert_eq!(row.len(), self.n_cols, "row length does not match column count");
        let Some((residual, _)) = self.reduce_internal(row) else {
            return false;
        };
        let pivot = residual.first_one().expect("nonzero residual");
        let pos = self.pivots.partition_point(|&p| p < pivot);
        let end = residual.last_word_nonzero();
        self.pivots.insert(pos, pivot);
        self.ends.insert(pos, end);
        self.rows.insert(pos, residual);
        // New pivot may appear inside earlier rows; reduced form is stale.
        self.reduced = self.rows.len() == 1;
        true
    }

    /// Fully reduce `v` against the current rows: the residual has no set
    /// bit in any pivot column. Zero iff `v` is in the row space.
    #[must_use]
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.n_cols, "vector length does not match column count");
        match self.reduce_internal(v.clone()) {
            Some((residual, _)) => residual,
            None => BitVector::zeros(self.n_cols),
        }
    }

    /// Membership in the row space.
    #[must_use]
    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Reduce until no pivot-column bit remains. Every XOR clears the bit at
    /// its row's pivot and only sets bits beyond it, so one monotone scan
    /// suffices. Returns None if the result is zero, otherwise the residual
    /// and its last active word.
    fn reduce_internal(&self, mut v: BitVector) -> Option<(BitVector, usize)> {
        let mut next = 0usize;
        while let Some(l) = v.first_one_at_or_after(next) {
            if let Ok(idx) = self.pivots.binary_search(&l) {
                v.xor_assign_words(&self.rows[idx], l / 64, self.ends[idx]);
            }
            next = l + 1;
        }
        if v.is_zero() {
            None
        } else {
            let end = v.last_word_nonzero();
            Some((v, end))
        }
    }

    /// Back-substitute to the unique reduced row-echelon form: every pivot
    /// column is zero in all rows but its own.
    pub fn finalize_rref(&mut self) {
        if self.reduced {
            return;
        }
        for i in (0..self.rows.len()).rev() {
            // Rows after i are already reduced, so each XOR clears one pivot
            // bit and introduces only non-pivot bits beyond it; a single
            // ascending scan per row completes the back-substitution.
            let mut b = self.pivots[i] + 1;
            while let Some(l) = self.rows[i].first_one_at_or_after(b) {
                if let Ok(j) = self.pivots.binary_search(&l) {
                    let (lo, hi) = (l / 64, self.ends[j]);
                    let other = self.rows[j].clone();
                    self.rows[i].xor_assign_words(&other, lo, hi);
                    self.ends[i] = self.ends[i].max(hi);
                }
                b = l + 1;
            }
        }
        self.reduced = true;
    }

    /// Basis of the nullspace of the accumulated row space, one vector per
    /// free column in ascending order. Requires [`finalize_rref`]
    /// (Echelon::finalize_rref) to have run (it is invoked if pending).
    #[must_use]
    pub fn nullspace_basis(&mut self) -> Vec<BitVector> {
        self.finalize_rref();
        let mut basis = Vec::with_capacity(self.n_cols - self.rows.len());
        let mut next_pivot_idx = 0usize;
        for f in 0..self.n_cols {
            if next_pivot_idx < self.pivots.len() && self.pivots[next_pivot_idx] == f {
                next_pivot_idx += 1;
                continue;
            }
            let mut v = BitVector::singleton(self.n_cols, f);
            for (j, row) in self.rows.iter().enumerate() {
                if self.pivots[j] < f && row.get(f) {
                    v.set(self.pivots[j], true);
                }
            }
            basis.push(v);
        }
        basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force span of a row set: all 2^k combinations (k small).
    fn enumerate_span(rows: &[BitVector], n_cols: usize) -> Vec<BitVector> {
        assert!(rows.len() <= 16, "span enumeration oracle is exponential");
        let mut out = Vec::with_capacity(1 << rows.len());
        for mask in 0u32..(1 << rows.len()) {
            let mut v = BitVector::zeros(n_cols);
            for (i, r) in rows.iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    v.xor_assign(r);
                }
            }
            out.push(v);
        }
        out
    }

    fn span_size(rows: &[BitVector], n_cols: usize) -> usize {
        let mut vs = enumerate_span(rows, n_cols);
        vs.sort_by_key(|v| v.words().to_vec());
        vs.dedup();
        vs.len()
    }

    #[test]
    fn rank_of_identity() {
        assert_eq!(Gf2Matrix::identity(3).rank(), 3);
    }

    #[test]
    fn rank_of_zero_matrix() {
        let m = Gf2Matrix::from_rows(vec![BitVector::zeros(4), BitVector::zeros(4)], 4);
        assert_eq!(m.rank(), 0);
    }

    #[test]
    fn rank_of_dependent_rows() {
        // Third row is the sum of the first two; span has 2^2 elements.
        let m = Gf2Matrix::from_bits_strs(&["1100", "0110", "1010"]);
        assert_eq!(span_size(m.rows(), 4), 4);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn nullspace_of_zero_matrix_is_everything() {
        let m = Gf2Matrix::from_rows(vec![BitVector::zeros(4), BitVector::zeros(4)], 4);
        let b = m.nullspace_basis();
        assert_eq!(b.n_rows(), 4);
        assert_eq!(span_size(b.rows(), 4), 16);
    }

    #[test]
    fn nullspace_of_identity_is_trivial() {
        assert_eq!(Gf2Matrix::identity(5).nullspace_basis().n_rows(), 0);
    }

    #[test]
    fn nullspace_of_chain() {
        // {110, 011}: only 111 (and 0) is orthogonal-in-the-kernel sense.
        let m = Gf2Matrix::from_bits_strs(&["110", "011"]);
        let b = m.nullspace_basis();
        assert_eq!(b.n_rows(), 1);
        assert_eq!(b.row(0), &BitVector::from_bits_str("111"));
    }

    #[test]
    fn nullspace_vectors_annihilate() {
        let m = Gf2Matrix::from_bits_strs(&["1011011", "0111001", "1100010"]);
        let b = m.nullspace_basis();
        assert_eq!(b.n_rows(), 7 - m.rank());
        for r in b.rows() {
            assert!(m.mul_vector(r).is_zero());
        }
    }

    #[test]
    fn membership_basics() {
        let m = Gf2Matrix::from_bits_strs(&["100", "001"]);
        assert!(m.row_space_membership(&BitVector::from_bits_str("101")));
        assert!(m.row_space_membership(&BitVector::zeros(3)));
        let m2 = Gf2Matrix::from_bits_strs(&["101"]);
        assert!(!m2.row_space_membership(&BitVector::from_bits_str("110")));
    }

    #[test]
    fn membership_in_empty_matrix() {
        let m = Gf2Matrix::new(3);
        assert!(m.row_space_membership(&BitVector::zeros(3)));
        assert!(!m.row_space_membership(&BitVector::from_bits_str("010")));
    }

    #[test]
    fn column_reduce_single_row() {
        let m = Gf2Matrix::from_bits_strs(&["11"]);
        let (r, ops) = m.column_reduce_with_ops();
        assert_eq!(r, Gf2Matrix::from_bits_strs(&["10"]));
        assert_eq!(ops, vec![ColumnOp::Add { target: 1, source: 0 }]);
    }

    #[test]
    fn column_reduce_needs_swap() {
        let m = Gf2Matrix::from_bits_strs(&["01"]);
        let (r, ops) = m.column_reduce_with_ops();
        assert_eq!(r, Gf2Matrix::from_bits_strs(&["10"]));
        assert_eq!(ops, vec![ColumnOp::Swap(0, 1)]);
    }

    #[test]
    fn column_reduce_identity_is_noop() {
        let m = Gf2Matrix::identity(3);
        let (r, ops) = m.column_reduce_with_ops();
        assert_eq!(r, m);
        assert!(ops.is_empty());
    }

    #[test]
    fn column_reduce_full_rank_reaches_canonical_form() {
        let m = Gf2Matrix::from_bits_strs(&["11010", "01110", "00111"]);
        assert_eq!(m.rank(), 3);
        let (r, ops) = m.column_reduce_with_ops();
        for i in 0..3 {
            for j in 0..5 {
                assert_eq!(r.row(i).get(j), i == j, "entry ({i},{j})");
            }
        }
        assert_eq!(m.apply_column_ops(&ops), r);
    }

    #[test]
    fn independent_rows_drops_duplicates() {
        let m = Gf2Matrix::from_bits_strs(&["11", "11", "01"]);
        let ind = m.independent_rows();
        assert_eq!(ind.n_rows(), 2);
        assert_eq!(ind.row(0), &BitVector::from_bits_str("11"));
        assert_eq!(ind.row(1), &BitVector::from_bits_str("01"));
    }

    #[test]
    fn independent_rows_of_zero_rows_is_empty() {
        let m = Gf2Matrix::from_rows(vec![BitVector::zeros(3); 2], 3);
        assert_eq!(m.independent_rows().n_rows(), 0);
    }

    #[test]
    fn zero_column_matrix_is_legal() {
        let m = Gf2Matrix::from_rows(vec![BitVector::zeros(0); 3], 0);
        assert_eq!(m.rank(), 0);
        assert_eq!(m.nullspace_basis().n_rows(), 0);
        assert!(m.row_space_membership(&BitVector::zeros(0)));
    }

    #[test]
    fn echelon_rref_is_canonical_under_insert_order() {
        let rows = ["110101", "011011", "101110", "000111"];
        let mut a = Echelon::new(6);
        for r in rows {
            a.insert(BitVector::from_bits_str(r));
        }
        let mut b = Echelon::new(6);
        for r in rows.iter().rev() {
            b.insert(BitVector::from_bits_str(r));
        }
        a.finalize_rref();
        b.finalize_rref();
        assert_eq!(a.pivot_cols(), b.pivot_cols());
        assert_eq!(a.rows(), b.rows());
    }

    // ----- property tests -----

    fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Gf2Matrix> {
        (1..=max_cols, 0..=max_rows).prop_flat_map(|(c, r)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r)
                .prop_map(move |rows| {
                    Gf2Matrix::from_rows(
                        rows.iter().map(|b| BitVector::from_bools(b)).collect(),
                        c,
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn prop_rank_nullity(m in arb_matrix(8, 12)) {
            prop_assert_eq!(m.rank() + m.nullspace_basis().n_rows(), m.n_cols());
        }

        #[test]
        fn prop_nullspace_annihilates(m in arb_matrix(8, 12)) {
            for v in m.nullspace_basis().rows() {
                prop_assert!(m.mul_vector(v).is_zero());
            }
        }

        #[test]
        fn prop_nullspace_basis_independent(m in arb_matrix(8, 12)) {
            let b = m.nullspace_basis();
            prop_assert_eq!(b.rank(), b.n_rows());
        }

        #[test]
        fn prop_membership_matches_enumerated_span(m in arb_matrix(6, 9), probe in proptest::collection::vec(any::<bool>(), 9)) {
            let probe = BitVector::from_bools(&probe[..m.n_cols()]);
            let span = enumerate_span(m.rows(), m.n_cols());
            let hit = span.iter().any(|v| v == &probe);
            prop_assert_eq!(m.row_space_membership(&probe), hit);
        }

        #[test]
        fn prop_column_reduce_replay(m in arb_matrix(6, 10)) {
            let (r, ops) = m.column_reduce_with_ops();
            prop_assert_eq!(m.apply_column_ops(&ops), r);
        }

        #[test]
        fn prop_column_reduce_identity_block(m in arb_matrix(6, 10)) {
            // Whenever the input has full row rank the reduction is [I | 0].
            prop_assume!(m.rank() == m.n_rows() && m.n_rows() <= m.n_cols());
            let (r, _) = m.column_reduce_with_ops();
            for i in 0..m.n_rows() {
                for j in 0..m.n_cols() {
                    prop_assert_eq!(r.row(i).get(j), i == j);
                }
            }
        }

        #[test]
        fn prop_independent_rows_span_preserved(m in arb_matrix(6, 9)) {
            let ind = m.independent_rows();
            prop_assert_eq!(ind.n_rows(), m.rank());
            let all = enumerate_span(m.rows(), m.n_cols());
            for v in all {
                prop_assert!(ind.row_space_membership(&v));
            }
        }

        #[test]
        fn prop_reduce_residual_is_canonical(m in arb_matrix(6, 9), probe in proptest::collection::vec(any::<bool>(), 9)) {
            // residual == 0 iff member; and residual is itself reproducible.
            let probe = BitVector::from_bools(&probe[..m.n_cols()]);
            let ech = Echelon::from_rows(m.n_cols(), m.rows().iter().cloned());
            let r1 = ech.reduce(&probe);
            prop_assert_eq!(r1.is_zero(), m.row_space_membership(&probe));
            // reducing the residual again is a fixed point
            let r2 = ech.reduce(&r1);
            prop_assert_eq!(&r2, &r1);
        }
    }
}
