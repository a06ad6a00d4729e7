//! First protocol level: Alice ships a framework extended with `F`, Bob locks
//! every object with `T` and shuffles, Alice recovers the shuffle by trying
//! every ordering against `F`.
//!
//! Permutations are numbered by lexicographic (Lehmer) rank. A permutation
//! `perm` maps output position `j` to input position `perm[j]`, so Bob's reply
//! is `reply[j] = T(msg[perm[j]])`.

use rand::Rng;

use crate::algebra::{
    mul_mod, sample_framework_for, Framework, GroupElement, GroupParams, LockKeyF, LockKeyT,
    NaryLock, UnaryLock,
};
use crate::error::{Error, Result};

/// Largest permutation size whose factorial fits in a `u64`.
pub const MAX_PERMUTATION_SIZE: usize = 20;

pub fn factorial(n: usize) -> Result<u64> {
    if n > MAX_PERMUTATION_SIZE {
        return Err(Error::PermutationTooLarge(n));
    }
    Ok((1..=n as u64).product())
}

/// Lexicographic rank of a permutation of `size` items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermutationIndex {
    index: u64,
    size: usize,
}

impl PermutationIndex {
    pub fn new(index: u64, size: usize) -> Result<Self> {
        if index >= factorial(size)? {
            return Err(Error::IndexOutOfRange { index, size });
        }
        Ok(Self { index, size })
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new(0, size)
    }

    pub fn random<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Result<Self> {
        let count = factorial(size)?;
        Ok(Self {
            index: rng.random_range(0..count),
            size,
        })
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn permutation(&self) -> Vec<usize> {
        perm_unrank(self.index, self.size).expect("index validated at construction")
    }
}

pub fn perm_rank(perm: &[usize]) -> Result<PermutationIndex> {
    let size = perm.len();
    if size > MAX_PERMUTATION_SIZE {
        return Err(Error::PermutationTooLarge(size));
    }
    let mut used = vec![false; size];
    let mut index = 0u64;
    for (pos, &p) in perm.iter().enumerate() {
        if p >= size || used[p] {
            return Err(Error::InvalidPermutation(size));
        }
        let smaller_unused = used[..p].iter().filter(|u| !**u).count() as u64;
        index += smaller_unused * factorial(size - pos - 1)?;
        used[p] = true;
    }
    Ok(PermutationIndex { index, size })
}

pub fn perm_unrank(index: u64, size: usize) -> Result<Vec<usize>> {
    if index >= factorial(size)? {
        return Err(Error::IndexOutOfRange { index, size });
    }
    let mut pool: Vec<usize> = (0..size).collect();
    let mut rest = index;
    let mut out = Vec::with_capacity(size);
    for pos in 0..size {
        let f = factorial(size - pos - 1)?;
        let digit = (rest / f) as usize;
        rest %= f;
        out.push(pool.remove(digit));
    }
    Ok(out)
}

/// Rearranges `perm` into its lexicographic successor; false after the last.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// `out[j] = items[perm[j]]`.
pub fn apply_permutation<T: Copy>(perm: &[usize], items: &[T]) -> Vec<T> {
    perm.iter().map(|&p| items[p]).collect()
}

/// Inverse of [`apply_permutation`].
pub fn undo_permutation<T: Copy>(perm: &[usize], items: &[T]) -> Vec<T> {
    let mut out = items.to_vec();
    for (j, &p) in perm.iter().enumerate() {
        out[p] = items[j];
    }
    out
}

/// `O_1..O_n, O_{n+1}` as sent by Alice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameworkMsg {
    elements: Vec<GroupElement>,
}

impl FrameworkMsg {
    pub fn new(elements: Vec<GroupElement>) -> Result<Self> {
        if elements.len() < 3 {
            return Err(Error::FrameworkTooSmall(elements.len().saturating_sub(1)));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn values(&self) -> Vec<u64> {
        self.elements.iter().map(|e| e.value()).collect()
    }
}

/// Bob's locked and shuffled reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutedMsg {
    elements: Vec<GroupElement>,
}

impl PermutedMsg {
    pub fn new(elements: Vec<GroupElement>) -> Result<Self> {
        if elements.len() < 3 {
            return Err(Error::FrameworkTooSmall(elements.len().saturating_sub(1)));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn values(&self) -> Vec<u64> {
        self.elements.iter().map(|e| e.value()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlicePhase {
    Sent,
    Recovered,
    Ambiguous,
    NotFound,
}

impl AlicePhase {
    fn name(self) -> &'static str {
        match self {
            AlicePhase::Sent => "Sent",
            AlicePhase::Recovered => "Recovered",
            AlicePhase::Ambiguous => "Ambiguous",
            AlicePhase::NotFound => "NotFound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recovery {
    Recovered(PermutationIndex),
    /// Every ordering that satisfied the relation, in rank order.
    Ambiguous(Vec<PermutationIndex>),
    NotFound,
}

#[derive(Debug, Clone)]
pub struct AliceL1State<F = LockKeyF> {
    key_f: F,
    framework: Framework,
    o_next: GroupElement,
    genuine: bool,
    phase: AlicePhase,
}

impl<F: NaryLock> AliceL1State<F> {
    pub fn key(&self) -> &F {
        &self.key_f
    }

    pub fn framework(&self) -> &Framework {
        &self.framework
    }

    pub fn o_next(&self) -> GroupElement {
        self.o_next
    }

    /// Whether `o_next = F(framework)`. Never leaves Alice.
    pub fn genuine(&self) -> bool {
        self.genuine
    }

    pub fn phase(&self) -> AlicePhase {
        self.phase
    }

    fn message(&self) -> FrameworkMsg {
        let mut elements = self.framework.objects().to_vec();
        elements.push(self.o_next);
        FrameworkMsg { elements }
    }
}

/// Redraws before giving up on finding a framework whose `F` value is not
/// itself one of the objects.
const MAX_INIT_ATTEMPTS: usize = 1000;

/// Samples a framework, appends `O_{n+1} = F(O_1..O_n)` and returns the
/// message for Bob.
pub fn alice_init<F, R>(key_f: F, rng: &mut R) -> Result<(AliceL1State<F>, FrameworkMsg)>
where
    F: NaryLock,
    R: Rng + ?Sized,
{
    for _ in 0..MAX_INIT_ATTEMPTS {
        let framework = sample_framework_for(&key_f, rng)?;
        let o_next = key_f.apply(framework.objects())?;
        // A repeated value would make two orderings indistinguishable.
        if framework.contains(o_next) {
            continue;
        }
        return Ok(finish_init(key_f, framework, o_next, true));
    }
    Err(Error::GroupTooSmall {
        modulus: key_f.params().modulus(),
        requested: key_f.arity() + 1,
    })
}

/// Like [`alice_init`] but with a caller-chosen framework.
pub fn alice_init_with<F: NaryLock>(
    key_f: F,
    framework: Framework,
) -> Result<(AliceL1State<F>, FrameworkMsg)> {
    let o_next = key_f.apply(framework.objects())?;
    Ok(finish_init(key_f, framework, o_next, true))
}

/// Same framework distribution as [`alice_init`], but `O_{n+1}` is drawn
/// uniformly from the elements that are neither `F(O)` nor an object.
pub fn alice_init_unrelated<F, R>(key_f: F, rng: &mut R) -> Result<(AliceL1State<F>, FrameworkMsg)>
where
    F: NaryLock,
    R: Rng + ?Sized,
{
    let params = key_f.params();
    for _ in 0..MAX_INIT_ATTEMPTS {
        let framework = sample_framework_for(&key_f, rng)?;
        let related = key_f.apply(framework.objects())?;
        if framework.contains(related) {
            continue;
        }
        if params.order() <= framework.len() as u64 + 1 {
            break;
        }
        let o_next = loop {
            let x = params.random_element(rng);
            if x != related && !framework.contains(x) {
                break x;
            }
        };
        return Ok(finish_init(key_f, framework, o_next, false));
    }
    Err(Error::GroupTooSmall {
        modulus: params.modulus(),
        requested: key_f.arity() + 2,
    })
}

fn finish_init<F: NaryLock>(
    key_f: F,
    framework: Framework,
    o_next: GroupElement,
    genuine: bool,
) -> (AliceL1State<F>, FrameworkMsg) {
    let state = AliceL1State {
        key_f,
        framework,
        o_next,
        genuine,
        phase: AlicePhase::Sent,
    };
    let msg = state.message();
    (state, msg)
}

#[derive(Debug, Clone)]
pub struct BobL1State<T = LockKeyT> {
    key_t: T,
    sigma: PermutationIndex,
}

impl<T: UnaryLock> BobL1State<T> {
    pub fn key(&self) -> &T {
        &self.key_t
    }

    pub fn sigma(&self) -> PermutationIndex {
        self.sigma
    }

    /// Bob's reading of an announced transposition number.
    pub fn decode(&self, announced: PermutationIndex) -> bool {
        announced == self.sigma
    }
}

/// Locks every object with `T`, then shuffles by a fresh uniform permutation.
pub fn bob_respond<T, R>(
    key_t: T,
    msg: &FrameworkMsg,
    rng: &mut R,
) -> Result<(BobL1State<T>, PermutedMsg)>
where
    T: UnaryLock,
    R: Rng + ?Sized,
{
    let sigma = PermutationIndex::random(msg.elements.len(), rng)?;
    bob_respond_with(key_t, msg, sigma)
}

pub fn bob_respond_with<T: UnaryLock>(
    key_t: T,
    msg: &FrameworkMsg,
    sigma: PermutationIndex,
) -> Result<(BobL1State<T>, PermutedMsg)> {
    if sigma.size() != msg.elements.len() {
        return Err(Error::MessageLength {
            expected: msg.elements.len(),
            actual: sigma.size(),
        });
    }
    let locked: Vec<_> = msg.elements.iter().map(|&x| key_t.apply(x)).collect();
    let elements = apply_permutation(&sigma.permutation(), &locked);
    Ok((BobL1State { key_t, sigma }, PermutedMsg { elements }))
}

/// Every ordering of `msg` that satisfies `V_{n+1} = F(V_1..V_n)`, in rank
/// order.
pub fn matching_orderings<F: NaryLock + ?Sized>(
    key_f: &F,
    msg: &PermutedMsg,
) -> Result<Vec<PermutationIndex>> {
    let size = msg.elements.len();
    if size != key_f.arity() + 1 {
        return Err(Error::MessageLength {
            expected: key_f.arity() + 1,
            actual: size,
        });
    }
    factorial(size)?;
    let mut perm: Vec<usize> = (0..size).collect();
    let mut restored = vec![msg.elements[0]; size];
    let mut matches = Vec::new();
    let mut rank = 0u64;
    loop {
        for (j, &p) in perm.iter().enumerate() {
            restored[p] = msg.elements[j];
        }
        if key_f.apply(&restored[..size - 1])? == restored[size - 1] {
            matches.push(PermutationIndex { index: rank, size });
        }
        if !next_permutation(&mut perm) {
            break;
        }
        rank += 1;
    }
    Ok(matches)
}

/// Exhaustive recovery of Bob's permutation. Only valid from phase `Sent`.
pub fn alice_recover<F: NaryLock>(
    state: &mut AliceL1State<F>,
    msg: &PermutedMsg,
) -> Result<Recovery> {
    if state.phase != AlicePhase::Sent {
        return Err(Error::InvalidPhase(state.phase.name()));
    }
    let mut matches = matching_orderings(&state.key_f, msg)?;
    let (phase, outcome) = match matches.len() {
        0 => (AlicePhase::NotFound, Recovery::NotFound),
        1 => (
            AlicePhase::Recovered,
            Recovery::Recovered(matches.remove(0)),
        ),
        _ => (AlicePhase::Ambiguous, Recovery::Ambiguous(matches)),
    };
    state.phase = phase;
    Ok(outcome)
}

/// Whether some non-identity reordering of `(O_1, .., O_n, F(O))` satisfies
/// the `F` relation for every framework. Such a key makes every recovery
/// ambiguous (for example any `a_i = p - 2`, which is `-1` mod `p - 1`).
///
/// Works on exponent vectors over the free objects: the relation holds
/// identically iff it holds coefficient-wise mod `p - 1`.
pub fn structurally_ambiguous(key: &LockKeyF) -> bool {
    let m = key.params().order();
    let a = key.exponents();
    let n = a.len();
    let mut vecs: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect();
    vecs.push(a.to_vec());
    let mut perm: Vec<usize> = (0..=n).collect();
    while next_permutation(&mut perm) {
        let holds = (0..n).all(|c| {
            let rhs = (0..n).fold(0u64, |acc, j| {
                (acc + mul_mod(a[j] % m, vecs[perm[j]][c] % m, m)) % m
            });
            vecs[perm[n]][c] % m == rhs
        });
        if holds {
            return true;
        }
    }
    false
}

/// Redraws before giving up on finding a usable Alice key.
const MAX_KEY_ATTEMPTS: usize = 1000;

/// A uniformly drawn [`LockKeyF`], redrawn while [`structurally_ambiguous`].
pub fn sample_usable_key<R: Rng + ?Sized>(
    params: GroupParams,
    n: usize,
    rng: &mut R,
) -> Result<LockKeyF> {
    for _ in 0..MAX_KEY_ATTEMPTS {
        let key = LockKeyF::random(params, n, rng)?;
        if !structurally_ambiguous(&key) {
            return Ok(key);
        }
    }
    Err(Error::GroupTooSmall {
        modulus: params.modulus(),
        requested: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GroupParams;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// All permutations of `0..n` in lexicographic order, by recursion.
    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
            if prefix.len() == n {
                out.push(prefix.clone());
                return;
            }
            for x in 0..n {
                if !prefix.contains(&x) {
                    prefix.push(x);
                    go(prefix, n, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(&mut Vec::new(), n, &mut out);
        out
    }

    #[test]
    fn rank_worked_values() {
        assert_eq!(perm_rank(&[0, 1, 2]).unwrap().index(), 0);
        assert_eq!(perm_rank(&[2, 1, 0]).unwrap().index(), 5);
        assert_eq!(factorial(4).unwrap(), 24);
    }

    #[test]
    fn rank_matches_enumeration() {
        for n in 1..=5 {
            for (i, p) in all_perms(n).iter().enumerate() {
                assert_eq!(perm_rank(p).unwrap().index(), i as u64);
                assert_eq!(&perm_unrank(i as u64, n).unwrap(), p);
            }
        }
    }

    #[test]
    fn rank_errors() {
        assert_eq!(
            perm_unrank(24, 4),
            Err(Error::IndexOutOfRange { index: 24, size: 4 })
        );
        assert_eq!(perm_rank(&[0, 0, 1]), Err(Error::InvalidPermutation(3)));
        assert_eq!(perm_rank(&[0, 3, 1]), Err(Error::InvalidPermutation(3)));
        assert!(PermutationIndex::new(6, 3).is_err());
        assert_eq!(factorial(21), Err(Error::PermutationTooLarge(21)));
    }

    #[test]
    fn next_permutation_walks_in_rank_order() {
        let mut p = vec![0, 1, 2, 3];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen, all_perms(4));
    }

    fn worked() -> (AliceL1State, FrameworkMsg, LockKeyT) {
        let g = GroupParams::new(11).unwrap();
        let f = LockKeyF::new(g, vec![1, 2]).unwrap();
        let fw = Framework::from_values(g, &[2, 3]).unwrap();
        let (state, msg) = alice_init_with(f, fw).unwrap();
        (state, msg, LockKeyT::new(g, 3).unwrap())
    }

    #[test]
    fn worked_exchange() {
        let (mut alice, msg, t) = worked();
        assert_eq!(msg.values(), vec![2, 3, 7]);
        let (bob, reply) =
            bob_respond_with(t, &msg, PermutationIndex::identity(3).unwrap()).unwrap();
        assert_eq!(reply.values(), vec![8, 5, 2]);
        assert_eq!(
            alice_recover(&mut alice, &reply).unwrap(),
            Recovery::Recovered(PermutationIndex::identity(3).unwrap())
        );
        assert_eq!(alice.phase(), AlicePhase::Recovered);
        assert!(bob.decode(PermutationIndex::identity(3).unwrap()));
        // A second recovery from the same state is a protocol error.
        assert_eq!(
            alice_recover(&mut alice, &reply),
            Err(Error::InvalidPhase("Recovered"))
        );
    }

    #[test]
    fn worked_exchange_every_sigma() {
        for idx in 0..6 {
            let (mut alice, msg, t) = worked();
            let sigma = PermutationIndex::new(idx, 3).unwrap();
            let (_, reply) = bob_respond_with(t, &msg, sigma).unwrap();
            assert_eq!(
                alice_recover(&mut alice, &reply).unwrap(),
                Recovery::Recovered(sigma)
            );
        }
    }

    #[test]
    fn message_shapes() {
        let g = GroupParams::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = LockKeyF::random(g, 2, &mut rng).unwrap();
        let (_, msg) = alice_init(f, &mut rng).unwrap();
        assert_eq!(msg.elements().len(), 3);
        assert!(msg.values().iter().all(|&v| (1..101).contains(&v)));
    }

    #[test]
    fn unrelated_object_usually_not_found() {
        // Collision bound (n+1)!/(p-1) = 24/1008 per exchange.
        let g = GroupParams::new(1009).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let trials = 2000;
        let mut found = 0;
        for _ in 0..trials {
            let f = LockKeyF::random(g, 3, &mut rng).unwrap();
            let t = LockKeyT::random(g, &mut rng);
            let (mut alice, msg) = alice_init_unrelated(f, &mut rng).unwrap();
            assert!(!alice.genuine());
            let (_, reply) = bob_respond(t, &msg, &mut rng).unwrap();
            if alice_recover(&mut alice, &reply).unwrap() != Recovery::NotFound {
                found += 1;
            }
        }
        let bound = 24.0 / 1008.0;
        let rate = found as f64 / trials as f64;
        let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
        assert!(rate <= bound + 4.0 * sigma, "rate {rate} vs bound {bound}");
    }

    #[test]
    fn arity_mismatch_on_recover() {
        let (mut alice, _, _) = worked();
        let g = GroupParams::new(11).unwrap();
        let reply = PermutedMsg::new(
            [2, 3, 4, 5]
                .iter()
                .map(|&v| g.element(v).unwrap())
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            alice_recover(&mut alice, &reply),
            Err(Error::MessageLength { .. })
        ));
    }

    #[test]
    fn minus_one_exponent_is_structurally_ambiguous() {
        let g = GroupParams::new(101).unwrap();
        let bad = LockKeyF::new(g, vec![3, 99]).unwrap();
        assert!(structurally_ambiguous(&bad));
        // Every exchange with this key really is ambiguous.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = LockKeyT::new(g, 7).unwrap();
        for _ in 0..20 {
            let (mut alice, msg) = alice_init(&bad, &mut rng).unwrap();
            let (_, reply) = bob_respond(&t, &msg, &mut rng).unwrap();
            assert!(matches!(
                alice_recover(&mut alice, &reply).unwrap(),
                Recovery::Ambiguous(_)
            ));
        }
        assert!(!structurally_ambiguous(
            &LockKeyF::new(g, vec![3, 5]).unwrap()
        ));
    }

    #[test]
    fn usable_keys_recover_at_small_p() {
        let g = GroupParams::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut flagged = 0;
        for _ in 0..300 {
            let k = LockKeyF::random(g, 2, &mut rng).unwrap();
            flagged += usize::from(structurally_ambiguous(&k));
            let usable = sample_usable_key(g, 2, &mut rng).unwrap();
            assert!(!structurally_ambiguous(&usable));
        }
        assert!(flagged > 0);
    }

    proptest! {
        #[test]
        fn rank_unrank_roundtrip(size in 1usize..9, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let idx = PermutationIndex::random(size, &mut rng).unwrap();
            prop_assert_eq!(perm_rank(&idx.permutation()).unwrap(), idx);
        }

        #[test]
        fn bob_reply_inverts(seed in any::<u64>(), n in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = GroupParams::new(1_000_003).unwrap();
            let f = LockKeyF::random(g, n, &mut rng).unwrap();
            let t = LockKeyT::random(g, &mut rng);
            let (_, msg) = alice_init(f, &mut rng).unwrap();
            let (bob, reply) = bob_respond(t, &msg, &mut rng).unwrap();
            let unlocked: Vec<_> = reply.elements().iter().map(|&y| t.invert(y)).collect();
            let restored = undo_permutation(&bob.sigma().permutation(), &unlocked);
            prop_assert_eq!(restored, msg.elements().to_vec());
        }

        #[test]
        fn recovery_is_complete_and_sound(seed in any::<u64>(), n in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = GroupParams::new(1_000_003).unwrap();
            let f = LockKeyF::random(g, n, &mut rng).unwrap();
            let t = LockKeyT::random(g, &mut rng);
            let (alice, msg) = alice_init(f.clone(), &mut rng).unwrap();
            let (bob, reply) = bob_respond(t, &msg, &mut rng).unwrap();
            let found = matching_orderings(alice.key(), &reply).unwrap();
            prop_assert!(found.contains(&bob.sigma()));
            for idx in found {
                let v = undo_permutation(&idx.permutation(), reply.elements());
                prop_assert_eq!(f.apply(&v[..n]).unwrap(), v[n]);
            }
        }
    }
}
