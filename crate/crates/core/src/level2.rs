//! Second protocol level: every plaintext bit becomes a parity codeword, and
//! every codeword bit rides one Level-1 exchange.
//!
//! * bit 1: `O_{n+1} = F(O)`; Alice recovers Bob's shuffle and announces its
//!   rank.
//! * bit 0: `O_{n+1}` is random; Alice announces a uniformly random rank.
//!
//! Bob reads 1 exactly when the announced rank equals his shuffle, so a 0 is
//! misread as 1 with probability `1/(n+1)!`. Those errors are measured, not
//! corrected; an odd repetition factor with majority vote is available.

use std::fmt;

use rand::Rng;

use crate::algebra::{GroupParams, LockKeyF, LockKeyT, NaryLock, UnaryLock};
use crate::error::{Error, Result};
use crate::level1::{
    alice_init, alice_init_unrelated, alice_recover, bob_respond, sample_usable_key, FrameworkMsg,
    PermutationIndex, PermutedMsg, Recovery,
};

/// Ambiguous recoveries tolerated per bit before the session faults.
pub const DEFAULT_MAX_RETRIES: usize = 8;

/// Latin-1 code of every character, most significant bit first.
pub fn text_to_binary(plaintext: &str) -> Result<String> {
    let mut out = String::with_capacity(plaintext.len() * 8);
    for c in plaintext.chars() {
        let code = u32::from(c);
        if code > 0xFF {
            return Err(Error::UnrepresentableChar(c));
        }
        out.push_str(&format!("{code:08b}"));
    }
    Ok(out)
}

pub fn binary_to_text(binary: &str) -> Result<String> {
    let bits = parse_bits(binary)?;
    bits_to_text(&bits)
}

pub(crate) fn parse_bits(binary: &str) -> Result<Vec<bool>> {
    binary
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::MalformedBinary(format!("unexpected {other:?}"))),
        })
        .collect()
}

pub(crate) fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub(crate) fn bits_to_text(bits: &[bool]) -> Result<String> {
    if !bits.len().is_multiple_of(8) {
        return Err(Error::Framing(format!(
            "{} plaintext bits is not a whole number of characters",
            bits.len()
        )));
    }
    Ok(bits
        .chunks(8)
        .map(|byte| {
            let code = byte.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b));
            char::from(code)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WordClass {
    Zero,
    One,
    Decoy,
}

/// `w >= 2` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    bits: Vec<bool>,
}

impl Codeword {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.len() < 2 {
            return Err(Error::CodewordTooNarrow(bits.len()));
        }
        Ok(Self { bits })
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_bits(s)?)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_decoy(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.bits))
    }
}

/// All-ones is a decoy; otherwise even weight reads 0 and odd weight reads 1.
pub fn classify_word(word: &Codeword) -> WordClass {
    if word.is_decoy() {
        WordClass::Decoy
    } else if word.ones().is_multiple_of(2) {
        WordClass::Zero
    } else {
        WordClass::One
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedBit {
    /// All-ones draws that were kept before the final word.
    pub decoys: Vec<Codeword>,
    pub word: Codeword,
}

impl EncodedBit {
    /// Transmission order: decoys first, then the word.
    pub fn words(&self) -> impl Iterator<Item = &Codeword> {
        self.decoys.iter().chain(std::iter::once(&self.word))
    }
}

/// Uniform draw from the parity class of `bit`; each all-ones draw is kept as
/// a decoy and the draw repeats.
pub fn encode_bit<R: Rng + ?Sized>(bit: bool, w: usize, rng: &mut R) -> Result<EncodedBit> {
    if w < 2 {
        return Err(Error::CodewordTooNarrow(w));
    }
    let mut decoys = Vec::new();
    loop {
        let mut bits: Vec<bool> = (0..w - 1).map(|_| rng.random_bool(0.5)).collect();
        let parity = bits.iter().filter(|&&b| b).count() % 2 == 1;
        bits.push(parity != bit);
        let word = Codeword { bits };
        if word.is_decoy() {
            decoys.push(word);
        } else {
            return Ok(EncodedBit { decoys, word });
        }
    }
}

/// One channel bit carried by one (or, after restarts, several) Level-1
/// exchanges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitExchangeRecord {
    /// Exchanges abandoned because Alice's recovery was ambiguous.
    pub restarts: Vec<(FrameworkMsg, PermutedMsg)>,
    pub framework_msg: FrameworkMsg,
    pub permuted_msg: PermutedMsg,
    pub announced_index: PermutationIndex,
    /// Alice-private: the bit she sent.
    pub genuine: bool,
    /// Bob-side reading.
    pub decoded: bool,
}

pub fn transmit_bit<F, T, R>(
    alice_key: &F,
    bob_key: &T,
    bit: bool,
    max_retries: usize,
    rng: &mut R,
) -> Result<BitExchangeRecord>
where
    F: NaryLock + ?Sized,
    T: UnaryLock + ?Sized,
    R: Rng + ?Sized,
{
    let mut restarts = Vec::new();
    loop {
        let (mut alice, framework_msg) = if bit {
            alice_init(alice_key, rng)?
        } else {
            alice_init_unrelated(alice_key, rng)?
        };
        let (bob, permuted_msg) = bob_respond(bob_key, &framework_msg, rng)?;
        let announced_index = if bit {
            match alice_recover(&mut alice, &permuted_msg)? {
                Recovery::Recovered(idx) => idx,
                Recovery::Ambiguous(_) => {
                    restarts.push((framework_msg, permuted_msg));
                    if restarts.len() >= max_retries {
                        return Err(Error::RetriesExhausted(restarts.len()));
                    }
                    continue;
                }
                Recovery::NotFound => return Err(Error::RecoveryFailed),
            }
        } else {
            PermutationIndex::random(framework_msg.elements().len(), rng)?
        };
        return Ok(BitExchangeRecord {
            restarts,
            decoded: bob.decode(announced_index),
            framework_msg,
            permuted_msg,
            announced_index,
            genuine: bit,
        });
    }
}

/// Session-level parameters both sides agree on in the open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolParams {
    pub group: GroupParams,
    /// Framework size.
    pub n: usize,
    /// Codeword width.
    pub w: usize,
    /// Odd repetition factor, majority-decoded.
    pub repetition: usize,
    pub max_retries: usize,
}

impl ProtocolParams {
    pub fn new(group: GroupParams, n: usize, w: usize) -> Result<Self> {
        let p = Self {
            group,
            n,
            w,
            repetition: 1,
            max_retries: DEFAULT_MAX_RETRIES,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_repetition(mut self, r: usize) -> Result<Self> {
        self.repetition = r;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_retries(mut self, retries: usize) -> Self {
        self.max_retries = retries.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::FrameworkTooSmall(self.n));
        }
        // Bit 0 needs n objects, F(O) and one more distinct non-identity value.
        if self.group.modulus() - 2 < self.n as u64 + 2 {
            return Err(Error::GroupTooSmall {
                modulus: self.group.modulus(),
                requested: self.n + 2,
            });
        }
        if self.w < 2 {
            return Err(Error::CodewordTooNarrow(self.w));
        }
        if self.repetition == 0 || self.repetition.is_multiple_of(2) {
            return Err(Error::BadRepetition(self.repetition));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionKeys {
    pub alice: LockKeyF,
    pub bob: LockKeyT,
}

impl SessionKeys {
    pub fn random<R: Rng + ?Sized>(params: &ProtocolParams, rng: &mut R) -> Result<Self> {
        Ok(Self {
            alice: sample_usable_key(params.group, params.n, rng)?,
            bob: LockKeyT::random(params.group, rng),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageJob {
    pub plaintext: String,
    pub binary: String,
    /// Transmission order, decoys included.
    pub codewords: Vec<Codeword>,
    pub bit_records: Vec<BitExchangeRecord>,
}

impl MessageJob {
    pub fn decoy_count(&self) -> usize {
        self.codewords.iter().filter(|c| c.is_decoy()).count()
    }

    /// Channel bits Bob misread (always a sent 0 read as 1).
    pub fn bit_errors(&self) -> usize {
        self.bit_records
            .iter()
            .filter(|r| r.genuine != r.decoded)
            .count()
    }

    pub fn restarts(&self) -> usize {
        self.bit_records.iter().map(|r| r.restarts.len()).sum()
    }

    pub fn decoded_bits(&self) -> Vec<bool> {
        self.bit_records.iter().map(|r| r.decoded).collect()
    }
}

pub fn send_message<R: Rng + ?Sized>(
    plaintext: &str,
    keys: &SessionKeys,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<MessageJob> {
    params.validate()?;
    if keys.alice.arity() != params.n {
        return Err(Error::ArityMismatch {
            expected: params.n,
            actual: keys.alice.arity(),
        });
    }
    if keys.alice.params() != params.group || keys.bob.params() != params.group {
        return Err(Error::GroupMismatch);
    }
    let binary = text_to_binary(plaintext)?;
    let mut codewords = Vec::new();
    for bit in parse_bits(&binary)? {
        let encoded = encode_bit(bit, params.w, rng)?;
        codewords.extend(encoded.words().cloned());
    }
    let mut bit_records = Vec::new();
    for word in &codewords {
        for &bit in word.bits() {
            for _ in 0..params.repetition {
                bit_records.push(transmit_bit(
                    &keys.alice,
                    &keys.bob,
                    bit,
                    params.max_retries,
                    rng,
                )?);
            }
        }
    }
    Ok(MessageJob {
        plaintext: plaintext.to_owned(),
        binary,
        codewords,
        bit_records,
    })
}

/// Majority vote over groups of `r`, chunk into `w`-bit words, drop decoys,
/// read parities, then read 8-bit characters.
pub fn decode_channel_bits(bits: &[bool], w: usize, r: usize) -> Result<String> {
    if w < 2 {
        return Err(Error::CodewordTooNarrow(w));
    }
    if r == 0 || r.is_multiple_of(2) {
        return Err(Error::BadRepetition(r));
    }
    if !bits.len().is_multiple_of(r) {
        return Err(Error::Framing(format!(
            "{} channel bits is not a multiple of the repetition factor {r}",
            bits.len()
        )));
    }
    let voted: Vec<bool> = bits
        .chunks(r)
        .map(|g| g.iter().filter(|&&b| b).count() * 2 > r)
        .collect();
    if !voted.len().is_multiple_of(w) {
        return Err(Error::Framing(format!(
            "{} codeword bits is not a multiple of the width {w}",
            voted.len()
        )));
    }
    let mut plain = Vec::with_capacity(voted.len() / w);
    for chunk in voted.chunks(w) {
        let word = Codeword::new(chunk.to_vec())?;
        match classify_word(&word) {
            WordClass::Decoy => {}
            WordClass::Zero => plain.push(false),
            WordClass::One => plain.push(true),
        }
    }
    bits_to_text(&plain)
}

/// Bob's side: only the `decoded` field of each record is used.
pub fn receive_message(records: &[BitExchangeRecord], w: usize, r: usize) -> Result<String> {
    let bits: Vec<bool> = records.iter().map(|rec| rec.decoded).collect();
    decode_channel_bits(&bits, w, r)
}
