use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl RatingScale {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.min && r <= self.max
    }

    pub fn clip(&self, r: f64) -> f64 {
        r.clamp(self.min, self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    /// `user<TAB>item<TAB>rating<TAB>timestamp`, ratings 1..=5.
    Movielens,
    /// Either `user<TAB>item<TAB>rating` triplets or dense rows
    /// `count,r_1,...,r_100` with 99 marking a missing rating. Raw ratings in
    /// `[-10, 10]` are shifted to `[0, 20]` and rounded.
    Jester,
    /// `"User-ID";"ISBN";"Book-Rating"` with a header line. Rating 0 marks
    /// implicit feedback and is skipped; explicit ratings are 1..=10.
    Bxbooks,
}

impl DatasetFormat {
    pub fn scale(&self) -> RatingScale {
        match self {
            DatasetFormat::Movielens => RatingScale { min: 1.0, max: 5.0 },
            DatasetFormat::Jester => RatingScale { min: 0.0, max: 20.0 },
            DatasetFormat::Bxbooks => RatingScale { min: 1.0, max: 10.0 },
        }
    }
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "movielens" => Ok(DatasetFormat::Movielens),
            "jester" => Ok(DatasetFormat::Jester),
            "bxbooks" | "bx-books" => Ok(DatasetFormat::Bxbooks),
            other => Err(Error::Config(format!("unknown dataset format {other:?}"))),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::Movielens => "movielens",
            DatasetFormat::Jester => "jester",
            DatasetFormat::Bxbooks => "bxbooks",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub value: f64,
}

/// Sparse user × item ratings over dense 0-based indices, with the original
/// identifiers retained.
#[derive(Debug, Clone)]
pub struct RatingMatrix {
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    entries: Vec<Rating>,
    scale: RatingScale,
}

impl RatingMatrix {
    pub fn new(
        user_ids: Vec<String>,
        item_ids: Vec<String>,
        entries: Vec<Rating>,
        scale: RatingScale,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.user >= user_ids.len() {
                return Err(Error::IndexOutOfRange { index: e.user, len: user_ids.len() });
            }
            if e.item >= item_ids.len() {
                return Err(Error::IndexOutOfRange { index: e.item, len: item_ids.len() });
            }
            if !scale.contains(e.value) {
                return Err(Error::OutOfScaleRating { line: i + 1, rating: e.value, min: scale.min, max: scale.max });
            }
            if !seen.insert((e.user, e.item)) {
                return Err(Error::parse(i + 1, format!("duplicate rating for ({}, {})", e.user, e.item)));
            }
        }
        Ok(Self { user_ids, item_ids, entries, scale })
    }

    /// Same users, items and scale with a subset of the entries.
    pub fn with_entries(&self, entries: Vec<Rating>) -> Self {
        Self { user_ids: self.user_ids.clone(), item_ids: self.item_ids.clone(), entries, scale: self.scale }
    }

    pub fn num_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn entries(&self) -> &[Rating] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn user_id(&self, user: usize) -> &str {
        &self.user_ids[user]
    }

    pub fn item_id(&self, item: usize) -> &str {
        &self.item_ids[item]
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.user_ids.iter().position(|u| u == id)
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.item_ids.iter().position(|u| u == id)
    }

    /// Per-user `(item, rating)` lists sorted by item.
    pub fn by_user(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.num_users()];
        for e in &self.entries {
            out[e.user].push((e.item, e.value));
        }
        for list in &mut out {
            list.sort_by_key(|&(i, _)| i);
        }
        out
    }

    /// Per-item `(user, rating)` lists sorted by user.
    pub fn by_item(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.num_items()];
        for e in &self.entries {
            out[e.item].push((e.user, e.value));
        }
        for list in &mut out {
            list.sort_by_key(|&(u, _)| u);
        }
        out
    }

    /// Mean rating of every item; `None` for unrated items.
    pub fn item_means(&self) -> Vec<Option<f64>> {
        let mut sum = vec![0.0; self.num_items()];
        let mut count = vec![0usize; self.num_items()];
        for e in &self.entries {
            sum[e.item] += e.value;
            count[e.item] += 1;
        }
        sum.iter().zip(&count).map(|(&s, &c)| (c > 0).then(|| s / c as f64)).collect()
    }

    pub fn global_mean(&self) -> Option<f64> {
        (!self.entries.is_empty())
            .then(|| self.entries.iter().map(|e| e.value).sum::<f64>() / self.entries.len() as f64)
    }
}

#[derive(Default)]
struct IdInterner {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdInterner {
    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }
}

/// Parses a ratings file. Identifiers are remapped to dense indices in
/// order of first appearance.
pub fn parse_ratings(text: &str, format: DatasetFormat) -> Result<RatingMatrix> {
    let scale = format.scale();
    let mut users = IdInterner::default();
    let mut items = IdInterner::default();
    let mut entries = Vec::new();
    let mut dense_row = 0usize;
    let header_line = first_content_line(text);

    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut push = |user: &str, item: &str, value: f64, line: usize| -> Result<()> {
            if !value.is_finite() {
                return Err(Error::parse(line, "non-finite rating"));
            }
            if !scale.contains(value) {
                return Err(Error::OutOfScaleRating { line, rating: value, min: scale.min, max: scale.max });
            }
            entries.push(Rating { user: users.intern(user), item: items.intern(item), value });
            Ok(())
        };
        match format {
            DatasetFormat::Movielens => {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 4 {
                    return Err(Error::parse(no, format!("expected 4 tab-separated fields, got {}", fields.len())));
                }
                let value = parse_num(no, fields[2], "rating")?;
                parse_num(no, fields[3], "timestamp")?;
                push(fields[0].trim(), fields[1].trim(), value, no)?;
            }
            DatasetFormat::Jester => {
                let fields: Vec<&str> = line.split([',', '\t']).map(str::trim).collect();
                if fields.len() == 3 {
                    let raw = parse_num(no, fields[2], "rating")?;
                    push(fields[0], fields[1], jester_rescale(no, raw)?, no)?;
                } else if fields.len() > 3 {
                    let user = dense_row.to_string();
                    dense_row += 1;
                    for (j, f) in fields[1..].iter().enumerate() {
                        let raw = parse_num(no, f, "rating")?;
                        if raw == 99.0 {
                            continue;
                        }
                        push(&user, &(j + 1).to_string(), jester_rescale(no, raw)?, no)?;
                    }
                } else {
                    return Err(Error::parse(no, "expected a triplet or a dense rating row"));
                }
            }
            DatasetFormat::Bxbooks => {
                let fields: Vec<&str> = line.split(';').map(|f| f.trim().trim_matches('"')).collect();
                if fields.len() != 3 {
                    return Err(Error::parse(no, format!("expected 3 `;`-separated fields, got {}", fields.len())));
                }
                if idx == header_line && fields[2].parse::<f64>().is_err() {
                    continue; // header
                }
                let value = parse_num(no, fields[2], "rating")?;
                if value == 0.0 {
                    continue;
                }
                push(fields[0], fields[1], value, no)?;
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::parse(0, "no entries"));
    }
    RatingMatrix::new(users.ids, items.ids, entries, scale)
}

fn first_content_line(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty() && !l.trim().starts_with('#')).unwrap_or(0)
}

fn parse_num(line: usize, s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::parse(line, format!("bad {what} {s:?}")))
}

fn jester_rescale(line: usize, raw: f64) -> Result<f64> {
    if !(-10.0..=10.0).contains(&raw) {
        return Err(Error::OutOfScaleRating { line, rating: raw, min: -10.0, max: 10.0 });
    }
    Ok((raw + 10.0).round())
}

pub fn load_ratings(path: impl AsRef<Path>, format: DatasetFormat) -> Result<RatingMatrix> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    // BX-Books ships as Latin-1; identifiers only need to be stable
    let text = String::from_utf8_lossy(&bytes);
    parse_ratings(&text, format)
}
