//! N-valid rooted trees over the label alphabet `{0, …, p-1}`.
//!
//! A tree is N-valid when its root and the next `N-1` vertices form a chain
//! of zeros and every label word of length `N` occurs exactly once as `N`
//! consecutive vertices along a root-to-leaf path. Such trees are exactly the
//! spanning arborescences of the de Bruijn graph on `Z_p^N` rooted at `0^N`:
//! the vertex ending an occurrence of a word `w` is attached below the vertex
//! ending the occurrence of its predecessor word. Enumeration and the
//! min-height builder work on that graph directly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{all_words, decode, word_count};
use crate::group::is_prime;

/// Largest `p^N` accepted by [`enumerate_nvalid`].
pub const ENUMERATION_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    label: u32,
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Rooted labelled tree. Node 0 is the root; siblings are kept in
/// ascending label order and ids follow a pre-order walk, so two trees that
/// differ only by sibling order or id numbering compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PTree {
    p: u32,
    n: u32,
    nodes: Vec<Node>,
}

/// Serialized node: `{"id":0,"label":0,"parent":null}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub label: u32,
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeFile {
    pub p: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub nodes: Vec<NodeRecord>,
}

/// Labels of consecutive vertices, root side first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Window(pub Vec<u32>);

impl Window {
    pub fn labels(&self) -> &[u32] {
        &self.0
    }

    /// The leaf-side `len - 1` labels.
    pub fn suffix(&self) -> &[u32] {
        &self.0[1..]
    }

    /// The root-side `len - 1` labels.
    pub fn prefix(&self) -> &[u32] {
        &self.0[..self.0.len() - 1]
    }

    pub fn zeros(len: usize) -> Self {
        Window(vec![0; len])
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn check_params(p: u32, n: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::Parameter("N must be at least 1".into()));
    }
    Ok(())
}

impl PTree {
    /// Builds a tree from `(label, parent)` pairs where parents refer to
    /// positions in the same list.
    pub fn from_parents(p: u32, n: u32, nodes: &[(u32, Option<usize>)]) -> Result<Self> {
        let records: Vec<NodeRecord> = nodes
            .iter()
            .enumerate()
            .map(|(id, &(label, parent))| NodeRecord { id, label, parent })
            .collect();
        Self::from_records(p, n, &records)
    }

    /// Structural import: exactly one root, every parent id known, no cycles,
    /// every label below `p`.
    pub fn from_records(p: u32, n: u32, records: &[NodeRecord]) -> Result<Self> {
        check_params(p, n)?;
        if records.is_empty() {
            return Err(Error::MalformedTree {
                reason: "no nodes".into(),
                nodes: vec![],
            });
        }
        let mut index = BTreeMap::new();
        for (pos, r) in records.iter().enumerate() {
            if index.insert(r.id, pos).is_some() {
                return Err(Error::MalformedTree {
                    reason: "duplicate node id".into(),
                    nodes: vec![r.id],
                });
            }
        }
        let bad_labels: Vec<usize> = records
            .iter()
            .filter(|r| r.label >= p)
            .map(|r| r.id)
            .collect();
        if !bad_labels.is_empty() {
            return Err(Error::MalformedTree {
                reason: format!("labels must be below p = {p}"),
                nodes: bad_labels,
            });
        }
        let roots: Vec<usize> = records
            .iter()
            .filter(|r| r.parent.is_none())
            .map(|r| r.id)
            .collect();
        if roots.len() != 1 {
            return Err(Error::MalformedTree {
                reason: format!("expected exactly one root, found {}", roots.len()),
                nodes: roots,
            });
        }
        let dangling: Vec<usize> = records
            .iter()
            .filter(|r| r.parent.is_some_and(|q| !index.contains_key(&q)))
            .map(|r| r.id)
            .collect();
        if !dangling.is_empty() {
            return Err(Error::MalformedTree {
                reason: "parent id does not exist".into(),
                nodes: dangling,
            });
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); records.len()];
        for (pos, r) in records.iter().enumerate() {
            if let Some(q) = r.parent {
                children[index[&q]].push(pos);
            }
        }
        // pre-order walk from the root with children sorted by label
        let root = index[&roots[0]];
        let mut order = Vec::with_capacity(records.len());
        let mut stack = vec![root];
        let mut seen = vec![false; records.len()];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            order.push(v);
            let mut kids = children[v].clone();
            kids.sort_by_key(|&c| std::cmp::Reverse(records[c].label));
            stack.extend(kids);
        }
        if order.len() != records.len() {
            let stray: Vec<usize> = (0..records.len())
                .filter(|&v| !seen[v])
                .map(|v| records[v].id)
                .collect();
            return Err(Error::MalformedTree {
                reason: "nodes not reachable from the root (cycle)".into(),
                nodes: stray,
            });
        }
        let mut new_id = vec![0usize; records.len()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let nodes = order
            .iter()
            .map(|&v| {
                let mut kids: Vec<usize> = children[v].iter().map(|&c| new_id[c]).collect();
                kids.sort_unstable();
                Node {
                    label: records[v].label,
                    parent: records[v].parent.map(|q| new_id[index[&q]]),
                    children: kids,
                }
            })
            .collect();
        Ok(PTree { p, n, nodes })
    }

    /// A single root-to-leaf path carrying `labels`.
    pub fn path(p: u32, n: u32, labels: &[u32]) -> Result<Self> {
        let nodes: Vec<(u32, Option<usize>)> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i.checked_sub(1)))
            .collect();
        Self::from_parents(p, n, &nodes)
    }

    pub fn from_file(file: &TreeFile) -> Result<Self> {
        Self::from_records(file.p, file.n, &file.nodes)
    }

    pub fn to_file(&self) -> TreeFile {
        TreeFile {
            p: self.p,
            n: self.n,
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, node)| NodeRecord {
                    id,
                    label: node.label,
                    parent: node.parent,
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn label(&self, id: usize) -> u32 {
        self.nodes[id].label
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes[id].parent
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.nodes[id].children
    }

    /// `(parent, child)` pairs in id order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(id, node)| node.parent.map(|q| (q, id)))
    }

    fn depths(&self) -> Vec<usize> {
        // pre-order ids: parents precede children
        let mut depth = vec![0usize; self.nodes.len()];
        for id in 1..self.nodes.len() {
            depth[id] = depth[self.nodes[id].parent.expect("non-root")] + 1;
        }
        depth
    }

    /// Labels of the `len` vertices ending at `id`, root side first.
    fn window_ending_at(&self, id: usize, len: usize) -> Option<Vec<u32>> {
        let mut out = Vec::with_capacity(len);
        let mut cur = Some(id);
        for _ in 0..len {
            let v = cur?;
            out.push(self.nodes[v].label);
            cur = self.nodes[v].parent;
        }
        out.reverse();
        Some(out)
    }

    /// Every run of `len` consecutive vertices along a root-to-leaf path.
    pub fn windows(&self, len: usize) -> Vec<Window> {
        (0..self.nodes.len())
            .filter_map(|id| self.window_ending_at(id, len).map(Window))
            .collect()
    }

    /// Root chain of `N` zeros, each of the first `N-1` with a single child.
    pub fn zero_prefix_ok(&self) -> bool {
        let mut cur = 0usize;
        for level in 0..self.n as usize {
            if self.nodes[cur].label != 0 {
                return false;
            }
            if level + 1 < self.n as usize {
                match self.nodes[cur].children.as_slice() {
                    [only] => cur = *only,
                    _ => return false,
                }
            }
        }
        true
    }

    /// Number of vertices on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0) + 1
    }

    /// Window counting report; see [`validate_nvalid`].
    pub fn validate(&self) -> ValidationReport {
        let n = self.n as usize;
        let mut counts: BTreeMap<Vec<u32>, usize> = all_words(self.p, n).map(|w| (w, 0)).collect();
        for w in self.windows(n) {
            *counts.entry(w.0).or_insert(0) += 1;
        }
        let missing: Vec<Vec<u32>> = counts
            .iter()
            .filter(|(_, &c)| c == 0)
            .map(|(w, _)| w.clone())
            .collect();
        let repeated: Vec<(Vec<u32>, usize)> = counts
            .iter()
            .filter(|(_, &c)| c > 1)
            .map(|(w, &c)| (w.clone(), c))
            .collect();
        let zero_prefix = self.zero_prefix_ok();
        let covered = counts.values().filter(|&&c| c == 1).count();
        ValidationReport {
            p: self.p,
            n: self.n,
            total_words: counts.len(),
            words_once: covered,
            missing,
            repeated,
            zero_prefix,
            height: self.height(),
            valid: zero_prefix && covered == counts.len(),
        }
    }

    pub fn is_nvalid(&self) -> bool {
        self.validate().valid
    }

    /// (N+1)-windows of the tree plus the all-zero window standing for the
    /// zero extension of the root chain; exactly `p^N` for an N-valid tree.
    pub fn allowed_windows(&self) -> Result<BTreeSet<Window>> {
        let len = self.n as usize + 1;
        let mut set: BTreeSet<Window> = BTreeSet::new();
        let all = self.windows(len);
        let raw = all.len();
        set.extend(all);
        set.insert(Window::zeros(len));
        let expect = word_count(self.p, self.n as usize);
        if set.len() != expect || raw + 1 != expect {
            return Err(Error::InvalidTree(format!(
                "{} distinct {len}-windows (from {raw} occurrences) where p^N = {expect} are required",
                set.len()
            )));
        }
        Ok(set)
    }

    /// (N+1)-windows without the cardinality check, for negative tests.
    pub fn raw_windows(&self) -> BTreeSet<Window> {
        let len = self.n as usize + 1;
        let mut set: BTreeSet<Window> = self.windows(len).into_iter().collect();
        set.insert(Window::zeros(len));
        set
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("tree serializes")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph tree {{");
        let _ = writeln!(out, "  rankdir=TB;");
        let _ = writeln!(out, "  node [shape=circle];");
        for (id, node) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{id} [label=\"{}\"];", node.label);
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  n{a} -> n{b};");
        }
        out.push_str("}\n");
        out
    }

    /// Serializes as `json` or `dot`.
    pub fn export(&self, format: &str) -> Result<String> {
        match format {
            "json" => Ok(self.to_json()),
            "dot" => Ok(self.to_dot()),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Outcome of [`validate_nvalid`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub p: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub total_words: usize,
    pub words_once: usize,
    pub missing: Vec<Vec<u32>>,
    pub repeated: Vec<(Vec<u32>, usize)>,
    pub zero_prefix: bool,
    pub height: usize,
    pub valid: bool,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} windows, height {}",
            self.words_once, self.total_words, self.height
        )?;
        if !self.zero_prefix {
            write!(f, ", root chain is not {} zeros", self.n)?;
        }
        if !self.missing.is_empty() {
            write!(f, ", {} missing", self.missing.len())?;
        }
        if !self.repeated.is_empty() {
            write!(f, ", {} repeated", self.repeated.len())?;
        }
        Ok(())
    }
}

pub fn validate_nvalid(tree: &PTree) -> ValidationReport {
    tree.validate()
}

pub fn height(tree: &PTree) -> usize {
    tree.height()
}

pub fn allowed_windows(tree: &PTree) -> Result<BTreeSet<Window>> {
    tree.allowed_windows()
}

/// How [`build_nvalid`] picks a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Path along the linearised de Bruijn sequence that starts with `0^N`.
    DebruijnPath,
    /// Randomised depth-first growth; the seed fixes the tree.
    GreedyBranch,
    /// Breadth-first arborescence; every word sits at its shortest distance
    /// from `0^N`, which makes the height `N + max distance` minimal.
    MinHeight,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "debruijn" | "debruijn-path" => Ok(Strategy::DebruijnPath),
            "greedy" | "greedy-branch" => Ok(Strategy::GreedyBranch),
            "min-height" => Ok(Strategy::MinHeight),
            other => Err(Error::Parameter(format!("unknown strategy `{other}`"))),
        }
    }
}

/// de Bruijn sequence of order `n` over `Z_p`, lexicographically least
/// (so it starts with `0^n`), as the concatenation of Lyndon words whose
/// length divides `n`.
pub fn debruijn_sequence(p: u32, n: usize) -> Vec<u32> {
    let mut seq = Vec::with_capacity(word_count(p, n));
    let mut a = vec![0u32; n + 1];
    fn db(t: usize, period: usize, p: u32, n: usize, a: &mut Vec<u32>, seq: &mut Vec<u32>) {
        if t > n {
            if n.is_multiple_of(period) {
                seq.extend_from_slice(&a[1..=period]);
            }
            return;
        }
        a[t] = a[t - period];
        db(t + 1, period, p, n, a, seq);
        for j in a[t - period] + 1..p {
            a[t] = j;
            db(t + 1, t, p, n, a, seq);
        }
    }
    db(1, 1, p, n, &mut a, &mut seq);
    seq
}

/// Tree whose states (N-words) hang below the given parent states.
/// `parent[s]` is the index of the predecessor word of word `s`;
/// `parent[0]` (the zero word) is ignored.
fn tree_from_arborescence(p: u32, n: u32, parent: &[usize]) -> Result<PTree> {
    let nn = n as usize;
    let states = parent.len();
    let chain = nn - 1;
    // node ids: 0..chain-1 for the root chain, chain + s for state s
    let mut nodes: Vec<(u32, Option<usize>)> = Vec::with_capacity(chain + states);
    for i in 0..chain {
        nodes.push((0, i.checked_sub(1)));
    }
    for (s, &q) in parent.iter().enumerate() {
        let word = decode(s, p, nn);
        let label = word[nn - 1];
        let up = if s == 0 {
            chain.checked_sub(1)
        } else {
            Some(chain + q)
        };
        nodes.push((label, up));
    }
    PTree::from_parents(p, n, &nodes)
}

/// Constructs an N-valid tree.
pub fn build_nvalid(p: u32, n: u32, strategy: Strategy, seed: u64) -> Result<PTree> {
    check_params(p, n)?;
    let nn = n as usize;
    let states = word_count(p, nn);
    match strategy {
        Strategy::DebruijnPath => {
            let mut labels = debruijn_sequence(p, nn);
            labels.extend(std::iter::repeat_n(0, nn - 1));
            PTree::path(p, n, &labels)
        }
        Strategy::MinHeight => {
            let mut parent = vec![usize::MAX; states];
            parent[0] = 0;
            let mut queue = VecDeque::from([0usize]);
            while let Some(s) = queue.pop_front() {
                for c in 0..p {
                    let t = successor(s, c, p, nn);
                    if parent[t] == usize::MAX {
                        parent[t] = s;
                        queue.push_back(t);
                    }
                }
            }
            tree_from_arborescence(p, n, &parent)
        }
        Strategy::GreedyBranch => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut parent = vec![usize::MAX; states];
            parent[0] = 0;
            let mut placed = 1usize;
            let mut stack = vec![0usize];
            while let Some(&s) = stack.last() {
                if placed == states {
                    break;
                }
                let mut open: Vec<usize> = (0..p)
                    .map(|c| successor(s, c, p, nn))
                    .filter(|&t| parent[t] == usize::MAX)
                    .collect();
                if open.is_empty() {
                    stack.pop();
                    continue;
                }
                open.shuffle(&mut rng);
                let t = open[0];
                parent[t] = s;
                placed += 1;
                stack.push(t);
            }
            tree_from_arborescence(p, n, &parent)
        }
    }
}

/// Index of the word obtained by dropping the first label of word `s` and
/// appending `c`.
fn successor(s: usize, c: u32, p: u32, n: usize) -> usize {
    let top = word_count(p, n - 1);
    (s % top) * p as usize + c as usize
}

/// Lazy backtracking stream over all N-valid trees with `p^N <= 16`.
pub struct NvalidTrees {
    p: u32,
    n: u32,
    states: usize,
    /// choice[s] = predecessor label c (parent word = c ++ s[..N-1]); u32::MAX = unset
    choice: Vec<u32>,
    pos: usize,
    remaining: Option<usize>,
    done: bool,
}

fn predecessor(s: usize, c: u32, p: u32, n: usize) -> usize {
    c as usize * word_count(p, n - 1) + s / p as usize
}

impl NvalidTrees {
    /// Whether state `s` with its current choice reaches the zero word.
    fn acyclic_from(&self, s: usize) -> bool {
        let nn = self.n as usize;
        let mut cur = s;
        for _ in 0..=self.states {
            if cur == 0 {
                return true;
            }
            let c = self.choice[cur];
            if c == u32::MAX {
                return true;
            }
            cur = predecessor(cur, c, self.p, nn);
            if cur == s {
                return false;
            }
        }
        false
    }

    fn tree(&self) -> PTree {
        let nn = self.n as usize;
        let parent: Vec<usize> = (0..self.states)
            .map(|s| {
                if s == 0 {
                    0
                } else {
                    predecessor(s, self.choice[s], self.p, nn)
                }
            })
            .collect();
        tree_from_arborescence(self.p, self.n, &parent).expect("arborescence is a tree")
    }

    /// Advances to the next complete acyclic assignment.
    fn advance(&mut self) -> bool {
        // positions 1..states carry choices; pos points at the slot to bump
        loop {
            if self.pos == 0 {
                return false;
            }
            let s = self.pos;
            let next = if self.choice[s] == u32::MAX {
                0
            } else {
                self.choice[s] + 1
            };
            if next >= self.p {
                self.choice[s] = u32::MAX;
                self.pos -= 1;
                continue;
            }
            self.choice[s] = next;
            if !self.acyclic_from(s) {
                continue;
            }
            if s + 1 == self.states {
                return true;
            }
            self.pos += 1;
        }
    }
}

impl Iterator for NvalidTrees {
    type Item = PTree;

    fn next(&mut self) -> Option<PTree> {
        if self.done {
            return None;
        }
        if let Some(r) = self.remaining.as_mut() {
            if *r == 0 {
                self.done = true;
                return None;
            }
            *r -= 1;
        }
        if self.states == 1 {
            // p^N = 1 cannot happen for prime p, N >= 1
            self.done = true;
            return None;
        }
        if self.advance() {
            Some(self.tree())
        } else {
            self.done = true;
            None
        }
    }
}

/// Every N-valid tree for small `p^N`, in a deterministic order.
pub fn enumerate_nvalid(p: u32, n: u32, limit: Option<usize>) -> Result<NvalidTrees> {
    check_params(p, n)?;
    let states = word_count(p, n as usize);
    if states > ENUMERATION_LIMIT {
        return Err(Error::Resource(format!(
            "enumeration needs p^N <= {ENUMERATION_LIMIT}, got {states}"
        )));
    }
    Ok(NvalidTrees {
        p,
        n,
        states,
        choice: vec![u32::MAX; states],
        pos: 1,
        remaining: limit,
        done: false,
    })
}

/// Path label sequences (root side first, after the zero chain) of all words
/// reachable from `0^N` through the windows of `support`. Also returns how
/// many words were reached.
fn walk_support(support: &BTreeSet<Window>, p: u32, n: usize) -> (Vec<Vec<u32>>, usize) {
    let mut next: BTreeMap<&[u32], Vec<u32>> = BTreeMap::new();
    for w in support {
        next.entry(w.prefix()).or_default().push(w.0[n]);
    }
    let zero = vec![0u32; n];
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::from([zero.clone()]);
    let mut paths = Vec::new();
    let mut queue = VecDeque::from([(zero, Vec::<u32>::new())]);
    while let Some((state, path)) = queue.pop_front() {
        let Some(labels) = next.get(state.as_slice()) else {
            continue;
        };
        for &c in labels {
            let mut t = state[1..].to_vec();
            t.push(c);
            if !seen.insert(t.clone()) {
                continue;
            }
            let mut q = path.clone();
            q.push(c);
            paths.push(q.clone());
            queue.push_back((t, q));
        }
    }
    let _ = p;
    (paths, seen.len())
}

/// Rebuilds the tree generating a mask support: every support path
/// `0^N → α_s → … → α_{-N}` is inserted by matching its longest common prefix
/// with the tree grown so far and grafting the remaining tail there.
pub fn tree_from_support(support: &BTreeSet<Window>, p: u32, n: u32) -> Result<PTree> {
    check_params(p, n)?;
    let nn = n as usize;
    for w in support {
        if w.0.len() != nn + 1 {
            return Err(Error::InvalidSupport(format!(
                "window {w} does not have N+1 = {} labels",
                nn + 1
            )));
        }
        if w.0.iter().any(|&l| l >= p) {
            return Err(Error::InvalidSupport(format!(
                "window {w} has a label >= p"
            )));
        }
    }
    if !support.contains(&Window::zeros(nn + 1)) {
        return Err(Error::InvalidSupport(
            "the all-zero window is missing".into(),
        ));
    }
    let mut rows: BTreeMap<&[u32], usize> = BTreeMap::new();
    for w in support {
        *rows.entry(w.suffix()).or_insert(0) += 1;
    }
    let states = word_count(p, nn);
    let bad: Vec<String> = all_words(p, nn)
        .filter(|s| rows.get(s.as_slice()).copied().unwrap_or(0) != 1)
        .map(|s| format!("{s:?}"))
        .collect();
    if !bad.is_empty() {
        return Err(Error::InvalidSupport(format!(
            "leaf-side words without exactly one window: {}",
            bad.join(" ")
        )));
    }
    let (paths, reached) = walk_support(support, p, nn);
    if reached != states {
        return Err(Error::InvalidSupport(format!(
            "only {reached} of {states} words are reachable from the zero word"
        )));
    }

    // trie insertion: node list with (label, parent)
    let mut nodes: Vec<(u32, Option<usize>)> = (0..nn).map(|i| (0, i.checked_sub(1))).collect();
    let mut kids: Vec<BTreeMap<u32, usize>> = vec![BTreeMap::new(); nn];
    for i in 1..nn {
        kids[i - 1].insert(0, i);
    }
    for path in &paths {
        let mut cur = nn - 1;
        for &label in path {
            cur = match kids[cur].get(&label) {
                Some(&v) => v,
                None => {
                    let v = nodes.len();
                    nodes.push((label, Some(cur)));
                    kids.push(BTreeMap::new());
                    kids[cur].insert(label, v);
                    v
                }
            };
        }
    }
    let tree = PTree::from_parents(p, n, &nodes)?;
    if !tree.is_nvalid() {
        return Err(Error::Consistency(format!(
            "rebuilt tree is not N-valid: {}",
            tree.validate()
        )));
    }
    Ok(tree)
}

/// Reference trees used throughout the tests and the CLI examples.
pub mod fixtures {
    use super::PTree;

    /// The p = 3, N = 2 tree of height 6:
    /// `0 → 0 → 2 → {1 → 0, 0 → 1 → {1, 2}, 2}`.
    pub fn fig1() -> PTree {
        PTree::from_parents(
            3,
            2,
            &[
                (0, None),
                (0, Some(0)),
                (2, Some(1)),
                (1, Some(2)),
                (0, Some(2)),
                (2, Some(2)),
                (0, Some(3)),
                (1, Some(4)),
                (1, Some(7)),
                (2, Some(7)),
            ],
        )
        .expect("fixture is well formed")
    }

    /// Star `0 → {1, …, p-1}`: the N = 1 tree of the Haar function.
    pub fn haar(p: u32) -> PTree {
        let mut nodes = vec![(0, None)];
        nodes.extend((1..p).map(|l| (l, Some(0))));
        PTree::from_parents(p, 1, &nodes).expect("fixture is well formed")
    }

    /// fig1 plus a leaf `0` under the vertex ending `0 → 1`, which
    /// repeats the word `(1, 0)`.
    pub fn fig1_with_repeat() -> PTree {
        let mut t = fig1().to_file();
        let below = t
            .nodes
            .iter()
            .find(|r| {
                r.label == 1
                    && r.parent.is_some_and(|q| {
                        t.nodes[q].label == 0
                            && t.nodes[q].parent.is_some_and(|g| t.nodes[g].label == 2)
                    })
            })
            .map(|r| r.id)
            .expect("vertex 1 under 2 → 0");
        let id = t.nodes.len();
        t.nodes.push(super::NodeRecord {
            id,
            label: 0,
            parent: Some(below),
        });
        PTree::from_file(&t).expect("well formed")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn ws(list: &[&[u32]]) -> BTreeSet<Window> {
        list.iter().map(|w| Window(w.to_vec())).collect()
    }

    #[test]
    fn fig1_validates() {
        let t = fig1();
        let r = t.validate();
        assert!(r.valid, "{r}");
        assert_eq!(r.words_once, 9);
        assert_eq!(t.height(), 6);
        assert_eq!(t.node_count(), 10);
        assert_eq!(r.to_string(), "9/9 windows, height 6");
    }

    #[test]
    fn lone_chain_is_undercovered() {
        let t = PTree::path(3, 2, &[0, 0, 1]).unwrap();
        let r = t.validate();
        assert!(!r.valid);
        assert_eq!(r.missing.len(), 7);
    }

    #[test]
    fn debruijn_word_path() {
        let t = PTree::path(3, 2, &[0, 0, 1, 0, 2, 1, 1, 2, 2, 0]).unwrap();
        assert!(t.is_nvalid());
        assert_eq!(t.height(), 10);
    }

    #[test]
    fn zero_prefix_chain_only() {
        let t = PTree::path(3, 2, &[0, 0]).unwrap();
        assert_eq!(t.height(), 2);
        assert!(t.zero_prefix_ok());
        assert!(matches!(t.allowed_windows(), Err(Error::InvalidTree(_))));
    }

    #[test]
    fn zero_prefix_must_be_a_chain() {
        // root 0 with two children for N = 2 violates the chain condition
        let t = PTree::from_parents(2, 2, &[(0, None), (0, Some(0)), (1, Some(0))]).unwrap();
        assert!(!t.zero_prefix_ok());
        let t = PTree::from_parents(3, 1, &[(1, None), (0, Some(0))]).unwrap();
        assert!(!t.zero_prefix_ok());
    }

    #[test]
    fn malformed_structures() {
        let two_roots = [
            NodeRecord {
                id: 0,
                label: 0,
                parent: None,
            },
            NodeRecord {
                id: 1,
                label: 1,
                parent: None,
            },
        ];
        assert!(matches!(
            PTree::from_records(3, 1, &two_roots),
            Err(Error::MalformedTree { .. })
        ));
        let cycle = [
            NodeRecord {
                id: 0,
                label: 0,
                parent: None,
            },
            NodeRecord {
                id: 1,
                label: 1,
                parent: Some(2),
            },
            NodeRecord {
                id: 2,
                label: 2,
                parent: Some(1),
            },
        ];
        match PTree::from_records(3, 1, &cycle) {
            Err(Error::MalformedTree { nodes, .. }) => assert_eq!(nodes, vec![1, 2]),
            other => panic!("{other:?}"),
        }
        let bad_label = [NodeRecord {
            id: 0,
            label: 3,
            parent: None,
        }];
        assert!(PTree::from_records(3, 1, &bad_label).is_err());
        let dangling = [
            NodeRecord {
                id: 0,
                label: 0,
                parent: None,
            },
            NodeRecord {
                id: 1,
                label: 1,
                parent: Some(9),
            },
        ];
        assert!(PTree::from_records(3, 1, &dangling).is_err());
    }

    #[test]
    fn fig1_allowed_windows() {
        let got = fig1().allowed_windows().unwrap();
        let expect = ws(&[
            &[0, 0, 0],
            &[0, 0, 2],
            &[0, 2, 1],
            &[0, 2, 0],
            &[0, 2, 2],
            &[2, 1, 0],
            &[2, 0, 1],
            &[0, 1, 1],
            &[0, 1, 2],
        ]);
        assert_eq!(got, expect);
    }

    #[test]
    fn star_allowed_windows() {
        let got = haar(3).allowed_windows().unwrap();
        assert_eq!(got, ws(&[&[0, 0], &[0, 1], &[0, 2]]));
    }

    #[test]
    fn sibling_order_is_normalised() {
        let a = PTree::from_parents(3, 1, &[(0, None), (2, Some(0)), (1, Some(0))]).unwrap();
        assert_eq!(a, haar(3));
    }

    #[test]
    fn debruijn_sequences() {
        assert_eq!(debruijn_sequence(3, 2), vec![0, 0, 1, 0, 2, 1, 1, 2, 2]);
        assert_eq!(debruijn_sequence(2, 3), vec![0, 0, 0, 1, 0, 1, 1, 1]);
    }

    #[test]
    fn builders() {
        let t = build_nvalid(3, 2, Strategy::DebruijnPath, 0).unwrap();
        assert!(t.is_nvalid());
        assert_eq!(t.height(), 10);
        for s in [
            Strategy::DebruijnPath,
            Strategy::GreedyBranch,
            Strategy::MinHeight,
        ] {
            let t = build_nvalid(2, 1, s, 7).unwrap();
            assert_eq!(t, PTree::path(2, 1, &[0, 1]).unwrap());
            assert_eq!(t.height(), 2);
        }
        let t = build_nvalid(3, 2, Strategy::MinHeight, 0).unwrap();
        assert!(t.is_nvalid());
        assert!(t.height() <= fig1().height());
        assert_eq!(t.height(), 4);
        for seed in 0..20 {
            let t = build_nvalid(5, 2, Strategy::GreedyBranch, seed).unwrap();
            assert!(t.is_nvalid(), "seed {seed}");
            assert_eq!(t, build_nvalid(5, 2, Strategy::GreedyBranch, seed).unwrap());
        }
        assert!(build_nvalid(4, 1, Strategy::MinHeight, 0).is_err());
        assert!("sideways".parse::<Strategy>().is_err());
    }

    // Oracle: brute force over every parent assignment, keeping the ones that
    // validate, independent of the pruned backtracking stream.
    fn brute_force_count(p: u32, n: u32) -> usize {
        let nn = n as usize;
        let states = word_count(p, nn);
        let mut count = 0;
        for code in 0..word_count(p, states - 1) {
            let cs = decode(code, p, states - 1);
            let mut parent = vec![0usize; states];
            for s in 1..states {
                parent[s] = predecessor(s, cs[s - 1], p, nn);
            }
            if parent.iter().enumerate().skip(1).any(|(s, &q)| q == s) {
                continue;
            }
            let ok = (1..states).all(|s| {
                let mut cur = s;
                for _ in 0..states {
                    if cur == 0 {
                        return true;
                    }
                    cur = parent[cur];
                }
                false
            });
            if ok && tree_from_arborescence(p, n, &parent).unwrap().is_nvalid() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_nvalid(2, 1, None).unwrap().count(), 1);
        let trees: Vec<PTree> = enumerate_nvalid(3, 1, None).unwrap().collect();
        assert_eq!(trees.len(), 3);
        assert!(trees.contains(&PTree::path(3, 1, &[0, 1, 2]).unwrap()));
        assert!(trees.contains(&PTree::path(3, 1, &[0, 2, 1]).unwrap()));
        assert!(trees.contains(&haar(3)));
        assert_eq!(enumerate_nvalid(3, 2, Some(0)).unwrap().count(), 0);
        assert_eq!(enumerate_nvalid(3, 2, Some(5)).unwrap().count(), 5);
        assert!(matches!(
            enumerate_nvalid(17, 1, None),
            Err(Error::Resource(_))
        ));
        for (p, n) in [(2, 2), (2, 3), (3, 2), (5, 1)] {
            let all: Vec<PTree> = enumerate_nvalid(p, n, None).unwrap().collect();
            assert!(all.iter().all(PTree::is_nvalid));
            let distinct: BTreeSet<String> = all.iter().map(PTree::to_json).collect();
            assert_eq!(distinct.len(), all.len());
            assert_eq!(all.len(), brute_force_count(p, n), "p={p} N={n}");
        }
        assert!(enumerate_nvalid(3, 2, None).unwrap().any(|t| t == fig1()));
    }

    #[test]
    fn support_round_trip() {
        let t = fig1();
        let w = t.allowed_windows().unwrap();
        let back = tree_from_support(&w, 3, 2).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.allowed_windows().unwrap(), w);
        let star = tree_from_support(&ws(&[&[0, 0], &[0, 1], &[0, 2]]), 3, 1).unwrap();
        assert_eq!(star, haar(3));
    }

    #[test]
    fn support_errors() {
        let missing_zero = ws(&[&[1, 0], &[0, 1], &[0, 2]]);
        assert!(matches!(
            tree_from_support(&missing_zero, 3, 1),
            Err(Error::InvalidSupport(_))
        ));
        let two_in_row = ws(&[&[0, 0], &[0, 1], &[2, 1], &[0, 2]]);
        assert!(matches!(
            tree_from_support(&two_in_row, 3, 1),
            Err(Error::InvalidSupport(_))
        ));
        // rows fine but 1 and 2 only feed each other
        let cycle = ws(&[&[0, 0], &[2, 1], &[1, 2]]);
        assert!(matches!(
            tree_from_support(&cycle, 3, 1),
            Err(Error::InvalidSupport(_))
        ));
    }

    #[test]
    fn export_formats() {
        let t = fig1();
        let json = t.export("json").unwrap();
        let file: TreeFile = serde_json::from_str(&json).unwrap();
        assert_eq!(file.nodes.len(), 10);
        assert!(json.contains("\"N\": 2"));
        assert_eq!(PTree::from_json(&json).unwrap(), t);
        let dot = t.export("dot").unwrap();
        assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 9);
        assert!(matches!(t.export("png"), Err(Error::UnknownFormat(_))));
    }

    #[test]
    fn repeat_fixture_is_invalid() {
        let t = fig1_with_repeat();
        let r = t.validate();
        assert!(!r.valid);
        assert_eq!(r.repeated, vec![(vec![1, 0], 2)]);
    }
}
