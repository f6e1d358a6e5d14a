//! Line-oriented text formats for spaces, maps, actions, canopies and
//! element families.
//!
//! A document is a sequence of blocks. Each block starts with a header line
//! and may refer to objects defined earlier, in the same document or in one
//! loaded before it. Blank lines and lines starting with `#` are ignored.
//!
//! ```text
//! space LINE3
//! points l m r
//! minopen l : l
//! minopen m : l m r
//! minopen r : r
//!
//! map f : LINE3 -> LINE3
//! l -> l
//! m -> m
//! r -> l
//!
//! action swap on P9
//! elements e s
//! identity e
//! table e : e s
//! table s : s e
//! act s : (l,l) (m,l) (r,l) (l,m) (m,m) (r,m) (l,r) (m,r) (r,r)
//!
//! canopy C
//! chart U0 = LINE3
//! overlap U0 U0 : id id
//!
//! `id` names the identity of the chart when no map of that name is defined.
//!
//! family E on LINE3
//! element {l,m,r} {m}
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::canopy::{Canopy, Overlap};
use crate::fintop::{ContinuousMap, FinSpace, MapError, Point};
use crate::grpquot::GroupAction;
use crate::negligible::SubsetElement;
use crate::pointset::PointSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file, self.line, self.reason)
    }
}

impl std::error::Error for ParseError {}

/// A map as written, before continuity is checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawMap {
    pub name: String,
    pub dom: FinSpace,
    pub cod: FinSpace,
    pub images: Vec<Point>,
}

impl RawMap {
    pub fn into_map(&self) -> Result<ContinuousMap, MapError> {
        ContinuousMap::new(self.dom.clone(), self.cod.clone(), self.images.clone())
    }
}

#[derive(Clone, Debug)]
pub struct Family {
    pub name: String,
    pub space: FinSpace,
    pub elements: Vec<SubsetElement>,
}

/// Named objects by kind; [`Registry::defined`] keeps definition order.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    pub spaces: BTreeMap<String, FinSpace>,
    pub maps: BTreeMap<String, RawMap>,
    pub actions: BTreeMap<String, GroupAction>,
    pub canopies: BTreeMap<String, Canopy>,
    pub families: BTreeMap<String, Family>,
    order: Vec<(Kind, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Space,
    Map,
    Action,
    Canopy,
    Family,
}

impl Registry {
    /// Registry preloaded with the named fixture spaces and actions.
    pub fn with_fixtures() -> Self {
        use crate::fixtures::*;
        let mut r = Registry::default();
        for s in [sierp(), line3(), k5(), p9(), p25(), khalimsky_circle(4), khalimsky_circle(8)] {
            r.spaces.insert(s.name().to_string(), s);
        }
        for a in [rotation_p25(), swap_p9(), halfturn_c8(), reflection_p25()] {
            r.actions.insert(a.name().to_string(), a);
        }
        r
    }

    /// Objects defined by parsed documents (fixtures excluded), in order.
    pub fn defined(&self) -> &[(Kind, String)] {
        &self.order
    }

    pub fn last_of(&self, kind: Kind) -> Option<&str> {
        self.order.iter().rev().find(|(k, _)| *k == kind).map(|(_, n)| n.as_str())
    }

    /// Parses `text` and adds its blocks; `file` labels errors.
    pub fn load(&mut self, file: &str, text: &str) -> Result<(), ParseError> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut i = 0;
        while i < lines.len() {
            let start = i;
            i += 1;
            while i < lines.len() && !is_header(lines[i].1) {
                i += 1;
            }
            self.block(file, &lines[start..i])?;
        }
        Ok(())
    }

    fn block(&mut self, file: &str, lines: &[(usize, &str)]) -> Result<(), ParseError> {
        let (no, head) = lines[0];
        let err = |line: usize, reason: String| ParseError {
            file: file.to_string(),
            line,
            reason,
        };
        let word = head.split_whitespace().next().unwrap_or("");
        match word {
            "space" => {
                let s = parse_space(lines).map_err(|(l, r)| err(l, r))?;
                self.insert(Kind::Space, s.name().to_string());
                self.spaces.insert(s.name().to_string(), s);
            }
            "map" => {
                let m = self.parse_map(lines).map_err(|(l, r)| err(l, r))?;
                self.insert(Kind::Map, m.name.clone());
                self.maps.insert(m.name.clone(), m);
            }
            "action" => {
                let a = self.parse_action(lines).map_err(|(l, r)| err(l, r))?;
                self.insert(Kind::Action, a.name().to_string());
                self.actions.insert(a.name().to_string(), a);
            }
            "canopy" => {
                let c = self.parse_canopy(lines).map_err(|(l, r)| err(l, r))?;
                self.insert(Kind::Canopy, c.name.clone());
                self.canopies.insert(c.name.clone(), c);
            }
            "family" => {
                let f = self.parse_family(lines).map_err(|(l, r)| err(l, r))?;
                self.insert(Kind::Family, f.name.clone());
                self.families.insert(f.name.clone(), f);
            }
            _ => return Err(err(no, format!("unknown block `{word}`"))),
        }
        Ok(())
    }

    fn insert(&mut self, kind: Kind, name: String) {
        self.order.retain(|(k, n)| !(*k == kind && *n == name));
        self.order.push((kind, name));
    }

    pub fn space(&self, name: &str) -> Option<&FinSpace> {
        self.spaces.get(name)
    }

    fn need_space(&self, line: usize, name: &str) -> Result<&FinSpace, (usize, String)> {
        self.spaces
            .get(name)
            .ok_or_else(|| (line, format!("unknown space `{name}`")))
    }

    fn parse_map(&self, lines: &[(usize, &str)]) -> Result<RawMap, (usize, String)> {
        let (no, head) = lines[0];
        let rest = head.strip_prefix("map").unwrap_or("").trim();
        let (name, sig) = rest
            .split_once(':')
            .ok_or((no, "expected `map <name> : <A> -> <B>`".to_string()))?;
        let (a, b) = sig
            .split_once("->")
            .ok_or((no, "expected `<A> -> <B>`".to_string()))?;
        let name = single_word(no, name)?;
        let dom = self.need_space(no, a.trim())?.clone();
        let cod = self.need_space(no, b.trim())?.clone();
        let mut images: Vec<Option<Point>> = vec![None; dom.len()];
        for &(l, line) in &lines[1..] {
            let (p, q) = line.split_once("->").ok_or((l, "expected `p -> q`".to_string()))?;
            let p = point(&dom, l, p.trim())?;
            let q = point(&cod, l, q.trim())?;
            if images[p].replace(q).is_some() {
                return Err((l, format!("`{}` assigned twice", dom.label(p))));
            }
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(p, q)| q.ok_or((no, format!("no image for `{}`", dom.label(p)))))
            .collect::<Result<_, _>>()?;
        Ok(RawMap { name, dom, cod, images })
    }

    fn parse_action(&self, lines: &[(usize, &str)]) -> Result<GroupAction, (usize, String)> {
        let (no, head) = lines[0];
        let words: Vec<&str> = head.split_whitespace().collect();
        if words.len() != 4 || words[2] != "on" {
            return Err((no, "expected `action <name> on <space>`".into()));
        }
        let space = self.need_space(no, words[3])?.clone();
        let mut names: Vec<String> = Vec::new();
        let mut identity = None;
        let mut table: BTreeMap<usize, (usize, Vec<String>)> = BTreeMap::new();
        let mut acts: BTreeMap<String, (usize, Vec<Point>)> = BTreeMap::new();
        for &(l, line) in &lines[1..] {
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match kw {
                "elements" => names = rest.split_whitespace().map(String::from).collect(),
                "identity" => identity = Some((l, rest.trim().to_string())),
                "table" | "act" => {
                    let (who, vals) = rest
                        .split_once(':')
                        .ok_or((l, format!("expected `{kw} <element> : ...`")))?;
                    let who = who.trim().to_string();
                    let g = names
                        .iter()
                        .position(|n| *n == who)
                        .ok_or((l, format!("unknown element `{who}`")))?;
                    let vals: Vec<&str> = vals.split_whitespace().collect();
                    if kw == "table" {
                        table.insert(g, (l, vals.iter().map(|s| s.to_string()).collect()));
                    } else {
                        let imgs = vals
                            .iter()
                            .map(|v| point(&space, l, v))
                            .collect::<Result<Vec<_>, _>>()?;
                        if imgs.len() != space.len() {
                            return Err((l, format!("expected {} images", space.len())));
                        }
                        acts.insert(who, (l, imgs));
                    }
                }
                _ => return Err((l, format!("unknown action line `{kw}`"))),
            }
        }
        let k = names.len();
        let (il, iname) = identity.ok_or((no, "missing `identity` line".to_string()))?;
        let id = names
            .iter()
            .position(|n| *n == iname)
            .ok_or((il, format!("unknown element `{iname}`")))?;
        let mut rows = vec![Vec::new(); k];
        for g in 0..k {
            let (l, row) = table
                .get(&g)
                .ok_or((no, format!("missing table row for `{}`", names[g])))?;
            if row.len() != k {
                return Err((*l, format!("table row needs {k} entries")));
            }
            rows[g] = row
                .iter()
                .map(|s| names.iter().position(|n| n == s).ok_or((*l, format!("unknown element `{s}`"))))
                .collect::<Result<_, _>>()?;
        }
        let mut act: Vec<Option<Vec<Point>>> = vec![None; k];
        act[id] = Some((0..space.len()).collect());
        for (g, name) in names.iter().enumerate() {
            if let Some((_, imgs)) = acts.get(name) {
                act[g] = Some(imgs.clone());
            }
        }
        // derive the remaining point maps from the table
        loop {
            let mut grew = false;
            for a in 0..k {
                for b in 0..k {
                    let c = rows[a][b];
                    if act[c].is_none() {
                        if let (Some(pa), Some(pb)) = (&act[a], &act[b]) {
                            act[c] = Some(pb.iter().map(|&x| pa[x]).collect());
                            grew = true;
                        }
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let act = act
            .into_iter()
            .enumerate()
            .map(|(g, a)| a.ok_or((no, format!("no point map for `{}`", names[g]))))
            .collect::<Result<Vec<_>, _>>()?;
        GroupAction::new(words[1], space, names, id, rows, act).map_err(|e| (no, e.to_string()))
    }

    fn parse_canopy(&self, lines: &[(usize, &str)]) -> Result<Canopy, (usize, String)> {
        let (no, head) = lines[0];
        let name = single_word(no, head.strip_prefix("canopy").unwrap_or(""))?;
        let mut charts: Vec<(String, FinSpace)> = Vec::new();
        let mut overlaps = Vec::new();
        for &(l, line) in &lines[1..] {
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match kw {
                "chart" => {
                    let (c, s) = rest.split_once('=').ok_or((l, "expected `chart <name> = <space>`".to_string()))?;
                    charts.push((single_word(l, c)?, self.need_space(l, s.trim())?.clone()));
                }
                "overlap" => {
                    let (pair, legs) = rest
                        .split_once(':')
                        .ok_or((l, "expected `overlap <j> <k> : <rho1> <rho2>`".to_string()))?;
                    let pair: Vec<&str> = pair.split_whitespace().collect();
                    let legs: Vec<&str> = legs.split_whitespace().collect();
                    if pair.len() != 2 || legs.len() != 2 {
                        return Err((l, "expected two charts and two maps".into()));
                    }
                    overlaps.push((l, pair[0].to_string(), pair[1].to_string(), legs[0].to_string(), legs[1].to_string()));
                }
                _ => return Err((l, format!("unknown canopy line `{kw}`"))),
            }
        }
        let mut canopy = Canopy::new(name, charts);
        for (l, j, k, r1, r2) in overlaps {
            let idx = |c: &str| {
                canopy
                    .chart_names
                    .iter()
                    .position(|n| n == c)
                    .ok_or((l, format!("unknown chart `{c}`")))
            };
            let (j, k) = (idx(&j)?, idx(&k)?);
            let leg = |m: &str, chart: usize| -> Result<ContinuousMap, (usize, String)> {
                match self.maps.get(m) {
                    Some(raw) => raw.into_map().map_err(|e| (l, format!("map `{m}`: {e}"))),
                    None if m == "id" => Ok(ContinuousMap::identity(&canopy.charts[chart])),
                    None => Err((l, format!("unknown map `{m}`"))),
                }
            };
            let (rho1, rho2) = (leg(&r1, j)?, leg(&r2, k)?);
            if rho1.dom() != rho2.dom() || rho1.cod() != &canopy.charts[j] || rho2.cod() != &canopy.charts[k] {
                return Err((l, "overlap maps do not match the charts".into()));
            }
            let space = rho1.dom().clone();
            canopy = canopy.with_overlap(j, k, Overlap { space, rho1, rho2 });
        }
        Ok(canopy)
    }

    fn parse_family(&self, lines: &[(usize, &str)]) -> Result<Family, (usize, String)> {
        let (no, head) = lines[0];
        let words: Vec<&str> = head.split_whitespace().collect();
        if words.len() != 4 || words[2] != "on" {
            return Err((no, "expected `family <name> on <space>`".into()));
        }
        let space = self.need_space(no, words[3])?.clone();
        let mut elements = Vec::new();
        for &(l, line) in &lines[1..] {
            let rest = line
                .strip_prefix("element")
                .ok_or((l, "expected `element {U} {I}`".to_string()))?;
            let sets = split_sets(rest).map_err(|r| (l, r))?;
            if sets.len() != 2 {
                return Err((l, "expected two set literals".into()));
            }
            let u = parse_set(&space, sets[0]).map_err(|r| (l, r))?;
            let i = parse_set(&space, sets[1]).map_err(|r| (l, r))?;
            elements.push(SubsetElement::new(u, i));
        }
        Ok(Family {
            name: words[1].to_string(),
            space,
            elements,
        })
    }
}

fn is_header(line: &str) -> bool {
    matches!(
        line.split_whitespace().next(),
        Some("space" | "map" | "action" | "canopy" | "family")
    )
}

fn single_word(line: usize, s: &str) -> Result<String, (usize, String)> {
    let w: Vec<&str> = s.split_whitespace().collect();
    if w.len() == 1 {
        Ok(w[0].to_string())
    } else {
        Err((line, format!("expected a single name, got `{}`", s.trim())))
    }
}

fn point(space: &FinSpace, line: usize, label: &str) -> Result<Point, (usize, String)> {
    space
        .index_of(label)
        .ok_or_else(|| (line, format!("unknown point `{label}` in {}", space.name())))
}

fn parse_space(lines: &[(usize, &str)]) -> Result<FinSpace, (usize, String)> {
    let (no, head) = lines[0];
    let name = single_word(no, head.strip_prefix("space").unwrap_or(""))?;
    let mut labels: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, String, Vec<String>)> = Vec::new();
    for &(l, line) in &lines[1..] {
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match kw {
            "points" => labels = Some(rest.split_whitespace().map(String::from).collect()),
            "minopen" => {
                let (p, qs) = rest.split_once(':').ok_or((l, "expected `minopen <p> : ...`".to_string()))?;
                rows.push((l, p.trim().to_string(), qs.split_whitespace().map(String::from).collect()));
            }
            _ => return Err((l, format!("unknown space line `{kw}`"))),
        }
    }
    let labels = labels.ok_or((no, "missing `points` line".to_string()))?;
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if index.len() != labels.len() {
        return Err((no, "duplicate point label".into()));
    }
    let mut minopen: Vec<Option<PointSet>> = vec![None; labels.len()];
    for (l, p, qs) in &rows {
        let pi = *index.get(p.as_str()).ok_or((*l, format!("unknown point `{p}`")))?;
        let mut set = PointSet::EMPTY;
        for q in qs {
            set.insert(*index.get(q.as_str()).ok_or((*l, format!("unknown point `{q}`")))?);
        }
        if minopen[pi].replace(set).is_some() {
            return Err((*l, format!("second minopen line for `{p}`")));
        }
    }
    let minopen = minopen
        .into_iter()
        .enumerate()
        .map(|(i, m)| m.ok_or((no, format!("no minopen line for `{}`", labels[i]))))
        .collect::<Result<Vec<_>, _>>()?;
    FinSpace::new(name, labels, minopen).map_err(|e| (no, e.to_string()))
}

/// Splits `{a,b} {c}` into the two literals.
fn split_sets(s: &str) -> Result<Vec<&str>, String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = None;
    for (i, c) in s.char_indices() {
        match c {
            '{' => {
                if depth == 0 {
                    start = Some(i);
                }
                depth += 1;
            }
            '}' => {
                depth = depth.checked_sub(1).ok_or("unbalanced `}`")?;
                if depth == 0 {
                    out.push(&s[start.expect("opened")..=i]);
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced `{`".into());
    }
    Ok(out)
}

/// Parses a set literal `{a,b,(x,y)}`; commas inside brackets belong to labels.
pub fn parse_set(space: &FinSpace, lit: &str) -> Result<PointSet, String> {
    let inner = lit
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| format!("expected a set literal like {{a,b}}, got `{lit}`"))?;
    let mut out = PointSet::EMPTY;
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut push = |cur: &mut String| -> Result<(), String> {
        let t = cur.trim();
        if !t.is_empty() {
            let p = space
                .index_of(t)
                .ok_or_else(|| format!("unknown point `{t}` in {}", space.name()))?;
            out.insert(p);
        }
        cur.clear();
        Ok(())
    };
    for c in inner.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if c == ',' && depth == 0 {
            push(&mut cur)?;
        } else {
            cur.push(c);
        }
    }
    push(&mut cur)?;
    Ok(out)
}

pub fn emit_space(space: &FinSpace) -> String {
    let mut out = format!("space {}\npoints {}\n", space.name(), space.labels().join(" "));
    for x in 0..space.len() {
        let qs: Vec<&str> = space.minopen(x).iter().map(|q| space.label(q)).collect();
        out.push_str(&format!("minopen {} : {}\n", space.label(x), qs.join(" ")));
    }
    out
}

pub fn emit_map(name: &str, map: &ContinuousMap) -> String {
    let mut out = format!("map {} : {} -> {}\n", name, map.dom().name(), map.cod().name());
    for x in 0..map.dom().len() {
        out.push_str(&format!("{} -> {}\n", map.dom().label(x), map.cod().label(map.apply(x))));
    }
    out
}

pub fn emit_action(action: &GroupAction) -> String {
    let names = action.element_names();
    let mut out = format!(
        "action {} on {}\nelements {}\nidentity {}\n",
        action.name(),
        action.space().name(),
        names.join(" "),
        names[action.identity()]
    );
    for (g, row) in action.table().iter().enumerate() {
        let row: Vec<&str> = row.iter().map(|&h| names[h].as_str()).collect();
        out.push_str(&format!("table {} : {}\n", names[g], row.join(" ")));
    }
    let s = action.space();
    for g in action.non_identity() {
        let imgs: Vec<&str> = (0..s.len()).map(|x| s.label(action.apply(g, x))).collect();
        out.push_str(&format!("act {} : {}\n", names[g], imgs.join(" ")));
    }
    out
}

pub fn emit_family(family: &Family) -> String {
    let s = &family.space;
    let mut out = format!("family {} on {}\n", family.name, s.name());
    for e in &family.elements {
        out.push_str(&format!("element {} {}\n", s.fmt_set(e.u), s.fmt_set(e.i)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{line3, p25, rotation_p25, sierp};

    #[test]
    fn sierpinski_file() {
        let mut r = Registry::default();
        r.load("s.topo", "space S\npoints 0 1\nminopen 0 : 0 1\nminopen 1 : 1\n").unwrap();
        assert_eq!(r.space("S").unwrap().minopens(), sierp().minopens());
    }

    #[test]
    fn unknown_space_reports_line() {
        let mut r = Registry::default();
        let e = r.load("m.map", "# comment\n\nmap f : A -> B\nx -> y\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.reason.contains("unknown space `A`"));
        assert_eq!(e.to_string(), "m.map:3: unknown space `A`");
    }

    #[test]
    fn non_associative_table_rejected() {
        let mut r = Registry::with_fixtures();
        let text = "action bad on LINE3\nelements e a b\nidentity e\n\
                    table e : e a b\ntable a : a a e\ntable b : b e a\n\
                    act a : l m r\nact b : l m r\n";
        let e = r.load("bad.act", text).unwrap_err();
        assert!(e.reason.contains("invalid action"), "{}", e.reason);
    }

    #[test]
    fn round_trips() {
        for s in [sierp(), line3(), p25()] {
            let mut r = Registry::default();
            r.load("x", &emit_space(&s)).unwrap();
            let back = r.space(s.name()).unwrap();
            assert_eq!(back.labels(), s.labels());
            assert_eq!(back.minopens(), s.minopens());
        }
        let rot = rotation_p25();
        let mut r = Registry::with_fixtures();
        r.load("a", &emit_action(&rot)).unwrap();
        let back = &r.actions["rot"];
        assert_eq!(back.table(), rot.table());
        for g in 0..rot.order() {
            assert_eq!(back.as_map(g).images(), rot.as_map(g).images());
        }
        let l = line3();
        let m = ContinuousMap::from_pairs(&l, &l, &[("l", "l"), ("m", "m"), ("r", "l")]).unwrap();
        r.load("m", &emit_map("fold", &m)).unwrap();
        assert_eq!(r.maps["fold"].into_map().unwrap(), m);
    }

    #[test]
    fn set_literals_with_commas() {
        let p = p25();
        let s = parse_set(&p, "{(1,1), (2,2)}").unwrap();
        assert_eq!(s, p.set_of(&["(1,1)", "(2,2)"]).unwrap());
        assert!(parse_set(&p, "{(9,9)}").is_err());
        assert_eq!(parse_set(&p, "{}").unwrap(), PointSet::EMPTY);
    }

    #[test]
    fn canopy_and_family_blocks() {
        let mut r = Registry::with_fixtures();
        let text = "map id : LINE3 -> LINE3\nl -> l\nm -> m\nr -> r\n\
                    canopy C\nchart U0 = LINE3\noverlap U0 U0 : id id\n\
                    family E on LINE3\nelement {l,m,r} {m}\n";
        r.load("c", text).unwrap();
        let c = &r.canopies["C"];
        assert_eq!(c.len(), 1);
        crate::canopy::validate_canopy(c).unwrap();
        let f = &r.families["E"];
        let fam_text = emit_family(f);
        let mut r2 = Registry::with_fixtures();
        r2.load("f", &fam_text).unwrap();
        assert_eq!(r2.families["E"].elements, f.elements);
        assert_eq!(r.last_of(Kind::Family), Some("E"));
    }
}
