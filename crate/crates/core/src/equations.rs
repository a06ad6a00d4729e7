//! Definitive equations for the secret-key, public-key and double-key
//! concepts, executed over power-map operators.
//!
//! The double-key flow:
//!
//! ```text
//! C1 = A(S)                      Alice -> Bob
//! C2 = B(A(S) + L)               Bob -> Alice
//! C3 = A^-1(C2) = B(S) + A^-1(B(L))
//! C4 = B(S)                      safe part of C3
//! ```
//!
//! `+` is concatenation of tagged element lists. The tags are Alice's private
//! mark on the safe; Eve's view of a flow ([`FlowRecord::eve_view`]) carries
//! values only.

use crate::algebra::{GroupElement, GroupParams, LockKeyT, UnaryLock};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Safe,
    Letter,
}

/// Invertible unary operator: a power map or the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOperator {
    Power(LockKeyT),
    Identity(GroupParams),
}

impl UnaryOperator {
    pub fn power(params: GroupParams, exponent: u64) -> Result<Self> {
        Ok(UnaryOperator::Power(LockKeyT::new(params, exponent)?))
    }

    pub fn params(&self) -> GroupParams {
        match self {
            UnaryOperator::Power(k) => k.params(),
            UnaryOperator::Identity(p) => *p,
        }
    }

    pub fn apply(&self, x: GroupElement) -> GroupElement {
        match self {
            UnaryOperator::Power(k) => k.apply(x),
            UnaryOperator::Identity(_) => x,
        }
    }

    pub fn invert(&self, y: GroupElement) -> GroupElement {
        match self {
            UnaryOperator::Power(k) => k.invert(y),
            UnaryOperator::Identity(_) => y,
        }
    }

    pub fn inverse(&self) -> UnaryOperator {
        match self {
            UnaryOperator::Power(k) => UnaryOperator::Power(
                LockKeyT::new(k.params(), k.inverse_exponent())
                    .expect("inverse of an invertible exponent is invertible"),
            ),
            id => *id,
        }
    }
}

/// Tagged element list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Payload {
    items: Vec<(GroupElement, Tag)>,
}

impl Payload {
    pub fn new(elements: &[GroupElement], tag: Tag) -> Self {
        Self {
            items: elements.iter().map(|&e| (e, tag)).collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_values(params: GroupParams, values: &[u64], tag: Tag) -> Result<Self> {
        let elements = values
            .iter()
            .map(|&v| params.element(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(&elements, tag))
    }

    pub fn items(&self) -> &[(GroupElement, Tag)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn values(&self) -> Vec<u64> {
        self.items.iter().map(|(e, _)| e.value()).collect()
    }

    /// Elementwise application; tags ride along unchanged.
    pub fn map(&self, f: impl Fn(GroupElement) -> GroupElement) -> Payload {
        Payload {
            items: self.items.iter().map(|&(e, t)| (f(e), t)).collect(),
        }
    }

    /// The symbolic `+`.
    pub fn concat(&self, other: &Payload) -> Payload {
        let mut items = self.items.clone();
        items.extend_from_slice(&other.items);
        Payload { items }
    }

    pub fn part(&self, tag: Tag) -> Payload {
        Payload {
            items: self
                .items
                .iter()
                .copied()
                .filter(|&(_, t)| t == tag)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowRecord {
    pub c1: Payload,
    pub c2: Payload,
    pub c3: Payload,
    /// `B(S)`; `None` when there was no safe part to separate.
    pub c4: Option<Payload>,
    /// `A^-1(B(L))`.
    pub letter: Payload,
}

impl FlowRecord {
    /// What crossed the channel: `C1` then `C2`, values only.
    pub fn eve_view(&self) -> [Vec<u64>; 2] {
        [self.c1.values(), self.c2.values()]
    }
}

pub fn run_secret_key(e: &UnaryOperator, m: &Payload) -> (Payload, Payload) {
    let cipher = m.map(|x| e.apply(x));
    let recovered = cipher.map(|y| e.invert(y));
    (cipher, recovered)
}

pub fn run_double_key(
    a: &UnaryOperator,
    b: &UnaryOperator,
    s: &Payload,
    l: &Payload,
) -> FlowRecord {
    let c1 = s.map(|x| a.apply(x));
    let c2 = c1.concat(l).map(|x| b.apply(x));
    let c3 = c2.map(|y| a.invert(y));
    let safe = c3.part(Tag::Safe);
    let c4 = (!safe.is_empty()).then_some(safe);
    let letter = c3.part(Tag::Letter);
    FlowRecord {
        c1,
        c2,
        c3,
        c4,
        letter,
    }
}

/// Double-key with an empty letter (`L = 0`).
pub fn run_public_key(a: &UnaryOperator, b: &UnaryOperator, s: &Payload) -> FlowRecord {
    run_double_key(a, b, s, &Payload::empty())
}

/// With `A = B` and an empty safe, the double-key flow must collapse to Bob
/// sending `B(L)` and Alice recovering `L`.
pub fn check_secret_specialization(b: &UnaryOperator, l: &Payload) -> bool {
    let flow = run_double_key(b, b, &Payload::empty(), l);
    let (cipher, recovered) = run_secret_key(b, l);
    flow.c1.is_empty() && flow.c4.is_none() && flow.c2 == cipher && flow.letter == recovered
}
