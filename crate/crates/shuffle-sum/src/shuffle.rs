//! Protocol abstraction and the parallel-shuffler execution engine.
//!
//! An `m`-message protocol is a local randomizer mapping one input to `m`
//! messages plus an analyzer over the collector's view. The engine routes
//! message slot `j` of every user through its own independent shuffler, so
//! the view consists of `m` per-slot multisets. Multisets are stored in
//! canonical sorted order, which makes view equality well defined and
//! mirrors the fact that shuffling releases exactly the multiset of
//! messages. One slot may be flagged as unshuffled, in which case it stays
//! in user order and remains attributable.

use crate::error::{Error, Result};
use crate::sampling::{uniform_int, RngStream};

/// A residue in `Z_q` with exact modular arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    value: u64,
    modulus: u64,
}

impl GroupElement {
    /// Reduces `value` mod `q`. Requires `2 <= q < 2^63` so that sums of two
    /// residues never overflow.
    pub fn new(value: u64, modulus: u64) -> Result<Self> {
        if modulus < 2 || modulus >= 1 << 63 {
            return Err(Error::InvalidParameter(format!(
                "group order must satisfy 2 <= q < 2^63, got {modulus}"
            )));
        }
        Ok(GroupElement {
            value: value % modulus,
            modulus,
        })
    }

    /// Embeds a signed integer, wrapping negatives into `[0, q)`.
    pub fn from_signed(value: i64, modulus: u64) -> Result<Self> {
        let m = modulus as i128;
        if modulus < 2 || modulus >= 1 << 63 {
            return Err(Error::InvalidParameter(format!(
                "group order must satisfy 2 <= q < 2^63, got {modulus}"
            )));
        }
        let v = ((value as i128 % m) + m) % m;
        Ok(GroupElement {
            value: v as u64,
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn add(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.modulus, other.modulus, "mixed group orders");
        GroupElement {
            value: (self.value + other.value) % self.modulus,
            modulus: self.modulus,
        }
    }

    pub fn neg(&self) -> GroupElement {
        GroupElement {
            value: (self.modulus - self.value) % self.modulus,
            modulus: self.modulus,
        }
    }

    pub fn sub(&self, other: &GroupElement) -> GroupElement {
        self.add(&other.neg())
    }
}

/// The `n x m` matrix of messages produced by the randomizers, row per user.
#[derive(Debug, Clone)]
pub struct MessageMatrix<M> {
    rows: Vec<Vec<M>>,
}

impl<M> MessageMatrix<M> {
    pub fn new(rows: Vec<Vec<M>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Protocol("message matrix must be non-empty".into()));
        }
        let m = rows[0].len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Protocol("message matrix must be rectangular".into()));
        }
        Ok(MessageMatrix { rows })
    }

    pub fn users(&self) -> usize {
        self.rows.len()
    }

    pub fn messages_per_user(&self) -> usize {
        self.rows[0].len()
    }

    /// Transposes rows into per-slot columns, consuming the matrix.
    pub fn into_columns(self) -> Vec<Vec<M>> {
        let m = self.messages_per_user();
        let n = self.users();
        let mut columns: Vec<Vec<M>> = (0..m).map(|_| Vec::with_capacity(n)).collect();
        for row in self.rows {
            for (j, msg) in row.into_iter().enumerate() {
                columns[j].push(msg);
            }
        }
        columns
    }
}

/// What the data collector sees: one multiset per shuffled slot (stored
/// sorted), and the optional unshuffled slot in user order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View<M: Ord> {
    columns: Vec<Vec<M>>,
    unshuffled: Option<usize>,
}

impl<M: Ord> View<M> {
    /// Canonicalizes the shuffled columns by sorting them.
    pub fn new(mut columns: Vec<Vec<M>>, unshuffled: Option<usize>) -> Self {
        for (j, column) in columns.iter_mut().enumerate() {
            if Some(j) != unshuffled {
                column.sort_unstable();
            }
        }
        View {
            columns,
            unshuffled,
        }
    }

    pub fn message_count(&self) -> usize {
        self.columns.len()
    }

    pub fn users(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, j: usize) -> &[M] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<M>] {
        &self.columns
    }

    pub fn unshuffled_column(&self) -> Option<usize> {
        self.unshuffled
    }
}

/// A protocol in the shuffle model: a local randomizer, an analyzer, and
/// static metadata.
pub trait ShuffleProtocol {
    type Input: Clone + Sync;
    type Message: Ord + Clone + Send;

    fn name(&self) -> &str;

    /// Number of message slots (shufflers) the protocol uses.
    fn message_count(&self) -> usize;

    /// Slot that bypasses the shufflers, if any.
    fn unshuffled_column(&self) -> Option<usize> {
        None
    }

    /// Maps one user's input to exactly `message_count()` messages.
    fn randomize(&self, input: &Self::Input, rng: &mut RngStream) -> Result<Vec<Self::Message>>;

    /// Aggregates the view into the protocol output. Must be invariant under
    /// permutations within each shuffled multiset.
    fn analyze(&self, view: &View<Self::Message>) -> Result<f64>;
}

/// Uniformly random permutation of `items` in place (Fisher–Yates with
/// exactly uniform swap indices).
pub fn shuffle<M>(items: &mut [M], rng: &mut RngStream) {
    for i in (1..items.len()).rev() {
        let j = uniform_int(0, i as i64, rng).expect("valid range") as usize;
        items.swap(i, j);
    }
}

/// Runs one protocol execution: randomize every input, shuffle each slot
/// through its own shuffler (skipping an unshuffled slot), canonicalize, and
/// analyze. Returns the collector's view together with the output.
pub fn execute<P: ShuffleProtocol>(
    protocol: &P,
    inputs: &[P::Input],
    rng: &mut RngStream,
) -> Result<(View<P::Message>, f64)> {
    if inputs.is_empty() {
        return Err(Error::Protocol("protocol run needs at least one user".into()));
    }
    let m = protocol.message_count();
    let mut rows = Vec::with_capacity(inputs.len());
    for input in inputs {
        let row = protocol.randomize(input, rng)?;
        if row.len() != m {
            return Err(Error::Protocol(format!(
                "randomizer for {} produced {} messages, expected {m}",
                protocol.name(),
                row.len()
            )));
        }
        rows.push(row);
    }
    let mut columns = MessageMatrix::new(rows)?.into_columns();
    for (j, column) in columns.iter_mut().enumerate() {
        if Some(j) != protocol.unshuffled_column() {
            shuffle(column, rng);
        }
    }
    let view = View::new(columns, protocol.unshuffled_column());
    let output = protocol.analyze(&view)?;
    Ok((view, output))
}
