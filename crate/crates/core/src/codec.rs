//! Flattened contract state and its encoding as point and interval items.
//!
//! A state `Σ` maps hashes to values and is 0 almost everywhere. It is stored
//! as `2n+1` items: `Interval(min_H, h1), Point(h1, v1), Interval(h1, h2), ...,
//! Point(hn, vn), Interval(hn, max_H)`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::bval::BVal;
use crate::hash::{Hash512, KeyHasher};
use crate::ledger::Output;
use crate::script::{Datum, Script};
use crate::wallet::Wallet;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum KeySource {
    Var(String),
    Map(String, Vec<BVal>),
}

impl KeySource {
    /// `var_x` or `map_m[l1,...,ln]`.
    pub fn preimage(&self) -> String {
        match self {
            KeySource::Var(x) => alloc::format!("var_{x}"),
            KeySource::Map(m, point) => alloc::format!("map_{m}[{}]", to_str(point)),
        }
    }
}

/// `toStr` of a tuple: the components rendered and joined with `,`.
pub fn to_str(vals: &[BVal]) -> String {
    let mut s = String::new();
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        fmt::write(&mut s, format_args!("{v}")).expect("writing to a String");
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateKey {
    pub source: KeySource,
    pub hash: Hash512,
}

impl StateKey {
    pub fn new(source: KeySource, hasher: &dyn KeyHasher) -> Self {
        let hash = hasher.hash(source.preimage().as_bytes());
        assert!(
            hash.is_interior(),
            "state key {:?} hashes to a key-space sentinel",
            source.preimage()
        );
        StateKey { source, hash }
    }

    pub fn var(name: &str, hasher: &dyn KeyHasher) -> Self {
        Self::new(KeySource::Var(name.into()), hasher)
    }

    pub fn map(name: &str, point: &[BVal], hasher: &dyn KeyHasher) -> Self {
        Self::new(KeySource::Map(name.into(), point.to_vec()), hasher)
    }
}

/// `Σ` restricted to its non-default points.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlatState(BTreeMap<Hash512, BVal>);

impl FlatState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, h: &Hash512) -> BVal {
        self.0.get(h).cloned().unwrap_or_else(BVal::zero)
    }

    /// Sets `Σ(h) = v`; writing 0 removes the point.
    pub fn set(&mut self, h: Hash512, v: BVal) {
        if v.is_default() {
            self.0.remove(&h);
        } else {
            self.0.insert(h, v);
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Hash512, &BVal)> {
        self.0.iter()
    }

    /// Pointwise override by an update list.
    pub fn apply(&mut self, updates: &[(Hash512, BVal)]) {
        for (h, v) in updates {
            self.set(*h, v.clone());
        }
    }
}

impl FromIterator<(Hash512, BVal)> for FlatState {
    fn from_iter<I: IntoIterator<Item = (Hash512, BVal)>>(iter: I) -> Self {
        let mut s = FlatState::new();
        for (h, v) in iter {
            s.set(h, v);
        }
        s
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StateItem {
    /// `Σ(key) = value`, with `value != 0`.
    Point { key: Hash512, value: BVal },
    /// `Σ(h) = 0` for every `from < h < to`.
    Interval { from: Hash512, to: Hash512 },
}

/// Sort key of an item: points at `(h, 0)`, intervals at `(from, 1)`.
pub type Pos = (Hash512, u8);

impl StateItem {
    pub fn interval(from: Hash512, to: Hash512) -> Self {
        StateItem::Interval { from, to }
    }

    pub fn point(key: Hash512, value: BVal) -> Self {
        StateItem::Point { key, value }
    }

    pub fn pos(&self) -> Pos {
        match self {
            StateItem::Point { key, .. } => (*key, 0),
            StateItem::Interval { from, .. } => (*from, 1),
        }
    }

    /// Whether this item certifies the value of `Σ(h)`.
    pub fn covers(&self, h: &Hash512) -> bool {
        match self {
            StateItem::Point { key, .. } => key == h,
            StateItem::Interval { from, to } => from < h && h < to,
        }
    }

    /// The value this item certifies for a covered hash.
    pub fn value(&self) -> BVal {
        match self {
            StateItem::Point { value, .. } => value.clone(),
            StateItem::Interval { .. } => BVal::zero(),
        }
    }

    pub fn to_datum(&self) -> Datum {
        match self {
            StateItem::Point { key, value } => Datum::NonDefault {
                key: *key,
                value: value.clone(),
            },
            StateItem::Interval { from, to } => Datum::Default {
                from: *from,
                to: *to,
            },
        }
    }

    pub fn from_datum(d: &Datum) -> Option<Self> {
        match d {
            Datum::NonDefault { key, value } => Some(StateItem::point(*key, value.clone())),
            Datum::Default { from, to } => Some(StateItem::interval(*from, *to)),
            _ => None,
        }
    }

    /// The contract output carrying this item.
    pub fn to_output(&self) -> Output {
        Output {
            value: Wallet::new(),
            validator: Script::State,
            datum: self.to_datum(),
            in_contract: true,
        }
    }

    /// Recovers an item from a contract output of the exact shape [`StateItem::to_output`] builds.
    pub fn from_output(o: &Output) -> Option<Self> {
        if !o.in_contract || o.validator != Script::State || !o.value.is_zero() {
            return None;
        }
        Self::from_datum(&o.datum)
    }
}

impl fmt::Debug for StateItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateItem::Point { key, value } => write!(f, "o[{key:?} = {value:?}]"),
            StateItem::Interval { from, to } => write!(f, "o({from:?}, {to:?})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("no item certifies the value at {0:?}")]
    NoWitness(Hash512),
    #[error("items overlap at {0:?}")]
    Overlap(Hash512),
    #[error("items leave a gap at {0:?}")]
    Gap(Hash512),
    #[error("malformed item {0:?}")]
    Malformed(Box<StateItem>),
    #[error("update list is not strictly increasing at {0:?}")]
    UnsortedUpdates(Hash512),
    #[error("inputs cannot support the updates")]
    OutputMismatch,
}

/// Read access to a set of state items.
pub trait StateView {
    /// The item at sort position `pos`.
    fn at(&self, pos: &Pos) -> Option<&StateItem>;
    /// The last item strictly before `pos`.
    fn before(&self, pos: &Pos) -> Option<&StateItem>;

    fn point(&self, h: &Hash512) -> Option<&StateItem> {
        self.at(&(*h, 0))
    }

    /// The interval strictly containing `h`.
    fn enclosing(&self, h: &Hash512) -> Option<&StateItem> {
        self.before(&(*h, 0)).filter(|i| match i {
            StateItem::Interval { from, to } => from < h && h < to,
            _ => false,
        })
    }

    /// The interval `(h', h)` for some `h'`.
    fn ending_at(&self, h: &Hash512) -> Option<&StateItem> {
        self.before(&(*h, 0))
            .filter(|i| matches!(i, StateItem::Interval { to, .. } if to == h))
    }

    /// The interval `(h, h'')` for some `h''`.
    fn starting_at(&self, h: &Hash512) -> Option<&StateItem> {
        self.at(&(*h, 1))
    }
}

/// State items indexed by position, each with a payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemIndex<T> {
    map: BTreeMap<Pos, (StateItem, T)>,
}

impl<T> Default for ItemIndex<T> {
    fn default() -> Self {
        ItemIndex {
            map: BTreeMap::new(),
        }
    }
}

impl<T> ItemIndex<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an item. Fails if another item already sits at the same position.
    pub fn insert(&mut self, item: StateItem, payload: T) -> Result<(), CodecError> {
        let pos = item.pos();
        if self.map.contains_key(&pos) {
            return Err(CodecError::Overlap(pos.0));
        }
        self.map.insert(pos, (item, payload));
        Ok(())
    }

    pub fn remove(&mut self, item: &StateItem) -> Option<T> {
        match self.map.get(&item.pos()) {
            Some((i, _)) if i == item => self.map.remove(&item.pos()).map(|(_, t)| t),
            _ => None,
        }
    }

    pub fn get(&self, item: &StateItem) -> Option<&T> {
        match self.map.get(&item.pos()) {
            Some((i, t)) if i == item => Some(t),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = &StateItem> {
        self.map.values().map(|(i, _)| i)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&StateItem, &T)> {
        self.map.values().map(|(i, t)| (i, t))
    }
}

impl ItemIndex<()> {
    pub fn from_items<I: IntoIterator<Item = StateItem>>(items: I) -> Result<Self, CodecError> {
        let mut idx = ItemIndex::new();
        for i in items {
            idx.insert(i, ())?;
        }
        Ok(idx)
    }
}

impl<T> StateView for ItemIndex<T> {
    fn at(&self, pos: &Pos) -> Option<&StateItem> {
        self.map.get(pos).map(|(i, _)| i)
    }

    fn before(&self, pos: &Pos) -> Option<&StateItem> {
        self.map.range(..*pos).next_back().map(|(_, (i, _))| i)
    }
}

/// The `2n+1` items representing `s`.
pub fn encode_state(s: &FlatState) -> Vec<StateItem> {
    let mut out = Vec::with_capacity(2 * s.len() + 1);
    let mut prev = Hash512::MIN;
    for (h, v) in s.iter() {
        out.push(StateItem::interval(prev, *h));
        out.push(StateItem::point(*h, v.clone()));
        prev = *h;
    }
    out.push(StateItem::interval(prev, Hash512::MAX));
    out
}

/// The value at `h` and the item certifying it.
pub fn lookup<'a, V: StateView + ?Sized>(view: &'a V, h: &Hash512) -> Result<(BVal, &'a StateItem), CodecError> {
    if let Some(p) = view.point(h) {
        return Ok((p.value(), p));
    }
    match view.enclosing(h) {
        Some(i) => Ok((BVal::zero(), i)),
        None => Err(CodecError::NoWitness(*h)),
    }
}

fn check_sorted(updates: &[(Hash512, BVal)]) -> Result<(), CodecError> {
    for w in updates.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(CodecError::UnsortedUpdates(w[1].0));
        }
    }
    Ok(())
}

/// The state items a transaction must spend to perform `updates`.
///
/// The "unless it already occurs" test only looks at the last appended item,
/// which is enough because `updates` is sorted.
pub fn gen_inputs<V: StateView + ?Sized>(view: &V, updates: &[(Hash512, BVal)]) -> Result<Vec<StateItem>, CodecError> {
    check_sorted(updates)?;
    let mut out: Vec<StateItem> = Vec::new();
    let push_once = |out: &mut Vec<StateItem>, item: &StateItem| {
        if out.last() != Some(item) {
            out.push(item.clone());
        }
    };
    for (h, v) in updates {
        match view.point(h) {
            Some(p) if !v.is_default() => out.push(p.clone()),
            Some(p) => {
                let left = view.ending_at(h).ok_or(CodecError::NoWitness(*h))?;
                let right = view.starting_at(h).ok_or(CodecError::NoWitness(*h))?;
                push_once(&mut out, left);
                out.push(p.clone());
                out.push(right.clone());
            }
            None => {
                let enc = view.enclosing(h).ok_or(CodecError::NoWitness(*h))?;
                push_once(&mut out, enc);
            }
        }
    }
    Ok(out)
}

/// The partial function computing the state items produced by a transaction
/// that spends `inputs` to perform `updates`.
///
/// `Out*` emits its leading interval when the next update lies past it, and
/// also when the interval ends exactly at an updated point whose new value is
/// non-default (the point item follows the interval in that case).
pub fn gen_outputs(inputs: &[StateItem], updates: &[(Hash512, BVal)]) -> Result<Vec<StateItem>, CodecError> {
    check_sorted(updates)?;
    let mut out = Vec::with_capacity(inputs.len());
    // The input list is `head` (if any) followed by `inputs[i..]`.
    let mut head: Option<(Hash512, Hash512)> = None;
    let mut i = 0;
    let mut j = 0;
    let mut star = false;
    let fail = Err(CodecError::OutputMismatch);

    loop {
        let front: Option<StateItem> = match head {
            Some((a, b)) => Some(StateItem::interval(a, b)),
            None => inputs.get(i).cloned(),
        };
        let rest_len = inputs.len() - i + head.is_some() as usize;
        let update = updates.get(j);

        if star {
            match (&front, update) {
                (None, None) => return Ok(out),
                (Some(StateItem::Interval { from, to }), None) => {
                    if rest_len != 1 {
                        return fail;
                    }
                    out.push(StateItem::interval(*from, *to));
                    return Ok(out);
                }
                (Some(StateItem::Interval { from, to }), Some((h, v))) => {
                    if h > to || (h == to && !v.is_default()) {
                        out.push(StateItem::interval(*from, *to));
                        if head.take().is_none() {
                            i += 1;
                        }
                    }
                    star = false;
                }
                _ => return fail,
            }
            continue;
        }

        let Some((h, v)) = update else {
            return if front.is_none() { Ok(out) } else { fail };
        };
        match front {
            Some(StateItem::Interval { from, to }) if from < *h && *h < to => {
                if head.take().is_none() {
                    i += 1;
                }
                if v.is_default() {
                    head = Some((from, to));
                } else {
                    out.push(StateItem::interval(from, *h));
                    out.push(StateItem::point(*h, v.clone()));
                    head = Some((*h, to));
                }
                j += 1;
                star = true;
            }
            Some(StateItem::Point { key, .. }) if key == *h && !v.is_default() => {
                debug_assert!(head.is_none());
                out.push(StateItem::point(*h, v.clone()));
                i += 1;
                j += 1;
            }
            Some(StateItem::Interval { from, to }) if to == *h && v.is_default() => {
                // Merge `(from, h) h (h, to2)`.
                let base = if head.is_some() { i } else { i + 1 };
                let merged_to = match (inputs.get(base), inputs.get(base + 1)) {
                    (Some(StateItem::Point { key, .. }), Some(StateItem::Interval { from: f2, to: t2 }))
                        if key == h && f2 == h =>
                    {
                        *t2
                    }
                    _ => return fail,
                };
                head = Some((from, merged_to));
                i = base + 2;
                j += 1;
                star = true;
            }
            _ => return fail,
        }
    }
}

/// Recovers `Σ` from a complete item set.
pub fn decode_state<I: IntoIterator<Item = StateItem>>(items: I) -> Result<FlatState, CodecError> {
    let mut sorted: Vec<StateItem> = items.into_iter().collect();
    sorted.sort_by_key(StateItem::pos);
    let mut s = FlatState::new();
    // `cursor` is the upper end of what has been covered so far.
    let mut cursor = Hash512::MIN;
    let mut expect_interval = true;
    for item in sorted {
        match &item {
            StateItem::Interval { from, to } => {
                if from >= to {
                    return Err(CodecError::Malformed(Box::new(item.clone())));
                }
                if !expect_interval || *from != cursor {
                    return Err(if *from < cursor || !expect_interval {
                        CodecError::Overlap(*from)
                    } else {
                        CodecError::Gap(cursor)
                    });
                }
                cursor = *to;
                expect_interval = false;
            }
            StateItem::Point { key, value } => {
                if value.is_default() || !key.is_interior() {
                    return Err(CodecError::Malformed(Box::new(item.clone())));
                }
                if expect_interval || *key != cursor {
                    return Err(if *key < cursor || (expect_interval && *key == cursor) {
                        CodecError::Overlap(*key)
                    } else {
                        CodecError::Gap(cursor)
                    });
                }
                s.set(*key, value.clone());
                expect_interval = true;
            }
        }
    }
    if expect_interval || cursor != Hash512::MAX {
        return Err(CodecError::Gap(cursor));
    }
    Ok(s)
}
