//! Binary character matrices built from cognate-coded wordlists, with
//! PHYLIP/NEXUS writers, coverage statistics and sparsity grids.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Wordlist;
use crate::error::{read_to_string, write_string};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Missing,
}

impl Cell {
    pub fn symbol(self) -> char {
        match self {
            Cell::Zero => '0',
            Cell::One => '1',
            Cell::Missing => '?',
        }
    }

    pub fn from_symbol(c: char) -> Option<Cell> {
        match c {
            '0' => Some(Cell::Zero),
            '1' => Some(Cell::One),
            '?' => Some(Cell::Missing),
            _ => None,
        }
    }
}

/// One binary character: presence of cognate class `cogid` for `concept`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Column {
    pub concept: String,
    pub cogid: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CharacterMatrix {
    taxa: Vec<String>,
    columns: Vec<Column>,
    cells: Vec<Vec<Cell>>,
}

impl CharacterMatrix {
    pub fn new(taxa: Vec<String>, columns: Vec<Column>, cells: Vec<Vec<Cell>>) -> Result<Self> {
        if cells.len() != taxa.len() || cells.iter().any(|r| r.len() != columns.len()) {
            return Err(Error::data("matrix shape does not match taxa and columns"));
        }
        let mut seen = BTreeSet::new();
        if let Some(t) = taxa.iter().find(|t| !seen.insert(t.as_str())) {
            return Err(Error::data(format!("duplicate taxon {t}")));
        }
        Ok(CharacterMatrix { taxa, columns, cells })
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn row(&self, taxon: usize) -> &[Cell] {
        &self.cells[taxon]
    }

    pub fn cell(&self, taxon: usize, column: usize) -> Cell {
        self.cells[taxon][column]
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Recovers the (taxon, concept) → cogid assignment. Fails if a taxon
    /// has data for a concept but not exactly one `1` among its columns.
    pub fn decode(&self) -> Result<BTreeMap<(String, String), u64>> {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (k, col) in self.columns.iter().enumerate() {
            groups.entry(col.concept.as_str()).or_default().push(k);
        }
        let mut out = BTreeMap::new();
        for (t, taxon) in self.taxa.iter().enumerate() {
            for (concept, cols) in &groups {
                let cells: Vec<Cell> = cols.iter().map(|&k| self.cells[t][k]).collect();
                if cells.iter().all(|&c| c == Cell::Missing) {
                    continue;
                }
                if cells.contains(&Cell::Missing) {
                    return Err(Error::data(format!("{taxon}/{concept}: partially missing group")));
                }
                let ones: Vec<usize> = cols.iter().copied().filter(|&k| self.cells[t][k] == Cell::One).collect();
                if ones.len() != 1 {
                    return Err(Error::data(format!(
                        "{taxon}/{concept}: {} cognate classes present",
                        ones.len()
                    )));
                }
                out.insert((taxon.clone(), concept.to_string()), self.columns[ones[0]].cogid);
            }
        }
        Ok(out)
    }

    fn check_taxon_names(&self) -> Result<()> {
        match self.taxa.iter().find(|t| t.is_empty() || t.contains(char::is_whitespace)) {
            Some(t) => Err(Error::data(format!("taxon name {t:?} is empty or contains whitespace"))),
            None => Ok(()),
        }
    }

    fn row_string(&self, t: usize) -> String {
        self.cells[t].iter().map(|c| c.symbol()).collect()
    }

    /// Relaxed PHYLIP: `ntaxa ncols`, then `taxon row` per line.
    pub fn to_phylip(&self) -> Result<String> {
        self.check_taxon_names()?;
        let mut out = format!("{} {}\n", self.taxa.len(), self.columns.len());
        for (t, taxon) in self.taxa.iter().enumerate() {
            let _ = writeln!(out, "{taxon} {}", self.row_string(t));
        }
        Ok(out)
    }

    pub fn to_nexus(&self) -> Result<String> {
        self.check_taxon_names()?;
        let mut out = String::from("#NEXUS\nBEGIN DATA;\n");
        let _ = writeln!(out, "\tDIMENSIONS NTAX={} NCHAR={};", self.taxa.len(), self.columns.len());
        out.push_str("\tFORMAT DATATYPE=STANDARD SYMBOLS=\"01\" MISSING=?;\n\tMATRIX\n");
        for (t, taxon) in self.taxa.iter().enumerate() {
            let _ = writeln!(out, "\t{taxon} {}", self.row_string(t));
        }
        out.push_str("\t;\nEND;\n");
        Ok(out)
    }

    /// Column metadata TSV: 1-based column index, concept, cogid.
    pub fn columns_meta(&self) -> String {
        let mut out = String::from("COLUMN\tCONCEPT\tCOGID\n");
        for (k, col) in self.columns.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}\t{}", k + 1, col.concept, col.cogid);
        }
        out
    }

    pub fn from_phylip(phylip: &str, meta: &str) -> Result<Self> {
        let columns = parse_columns_meta(meta)?;
        let ctx = "phylip";
        let mut lines = phylip.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (ntaxa, nchar) = match lines.next() {
            Some((_, h)) => parse_dims(h).ok_or_else(|| Error::parse(ctx, 1, "expected `ntaxa ncols`"))?,
            None => return Err(Error::parse(ctx, 1, "empty file")),
        };
        let rows: Vec<(usize, &str)> = lines.map(|(i, l)| (i + 1, l)).collect();
        if rows.len() != ntaxa {
            return Err(Error::parse(ctx, 1, format!("header says {ntaxa} taxa, found {}", rows.len())));
        }
        Self::from_rows(ctx, &rows, nchar, columns)
    }

    pub fn from_nexus(nexus: &str, meta: &str) -> Result<Self> {
        let columns = parse_columns_meta(meta)?;
        let ctx = "nexus";
        let mut rows = Vec::new();
        let mut in_matrix = false;
        let mut nchar = None;
        for (i, line) in nexus.lines().enumerate() {
            let trimmed = line.trim();
            let upper = trimmed.to_ascii_uppercase();
            if in_matrix {
                if trimmed == ";" {
                    in_matrix = false;
                } else if !trimmed.is_empty() {
                    rows.push((i + 1, trimmed));
                }
            } else if upper == "MATRIX" {
                in_matrix = true;
            } else if let Some(pos) = upper.find("NCHAR=") {
                let digits: String = upper[pos + 6..].chars().take_while(char::is_ascii_digit).collect();
                nchar = digits.parse().ok();
            }
        }
        let nchar = nchar.ok_or_else(|| Error::parse(ctx, 0, "missing NCHAR"))?;
        Self::from_rows(ctx, &rows, nchar, columns)
    }

    fn from_rows(ctx: &str, rows: &[(usize, &str)], nchar: usize, columns: Vec<Column>) -> Result<Self> {
        if columns.len() != nchar {
            return Err(Error::parse(ctx, 0, format!("{nchar} characters but {} metadata rows", columns.len())));
        }
        let mut taxa = Vec::new();
        let mut cells = Vec::new();
        for &(lineno, line) in rows {
            let (taxon, data) = line
                .split_once(' ')
                .unwrap_or((line, ""));
            let row: Vec<Cell> = data
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| Cell::from_symbol(c).ok_or_else(|| Error::parse(ctx, lineno, format!("invalid symbol {c:?}"))))
                .collect::<Result<_>>()?;
            if row.len() != nchar {
                return Err(Error::parse(ctx, lineno, format!("expected {nchar} characters, found {}", row.len())));
            }
            taxa.push(taxon.to_string());
            cells.push(row);
        }
        CharacterMatrix::new(taxa, columns, cells)
    }

    pub fn write_phylip(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_phylip()?)
    }

    pub fn write_nexus(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_nexus()?)
    }

    pub fn write_columns_meta(&self, path: &Path) -> Result<()> {
        write_string(path, &self.columns_meta())
    }

    pub fn load_phylip(phylip: &Path, meta: &Path) -> Result<Self> {
        Self::from_phylip(&read_to_string(phylip)?, &read_to_string(meta)?)
    }

    pub fn load_nexus(nexus: &Path, meta: &Path) -> Result<Self> {
        Self::from_nexus(&read_to_string(nexus)?, &read_to_string(meta)?)
    }
}

fn parse_dims(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    it.next().is_none().then_some((a, b))
}

fn parse_columns_meta(text: &str) -> Result<Vec<Column>> {
    let ctx = "column metadata";
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "COLUMN\tCONCEPT\tCOGID")) => {}
        _ => return Err(Error::parse(ctx, 1, "expected header `COLUMN\\tCONCEPT\\tCOGID`")),
    }
    let mut columns = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [idx, concept, cogid] = fields[..] else {
            return Err(Error::parse(ctx, i + 1, "expected 3 fields"));
        };
        if idx.parse::<usize>().ok() != Some(columns.len() + 1) {
            return Err(Error::parse(ctx, i + 1, format!("column index {idx} out of sequence")));
        }
        let cogid = cogid
            .parse()
            .map_err(|_| Error::parse(ctx, i + 1, format!("invalid cogid {cogid:?}")))?;
        columns.push(Column {
            concept: concept.to_string(),
            cogid,
        });
    }
    Ok(columns)
}

/// One column per (concept, cognate class): `1` for the taxon's class, `0`
/// for other classes of a concept the taxon has, `?` across the group when
/// the taxon lacks the concept. Concepts follow the wordlist's declared
/// order, cognate classes ascend within a concept.
pub fn encode_binary(wordlist: &Wordlist) -> Result<CharacterMatrix> {
    let mut assignment: HashMap<(&str, &str), u64> = HashMap::new();
    let mut classes: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
    let mut present: BTreeSet<&str> = BTreeSet::new();
    for row in wordlist.rows() {
        let cogid = row
            .cogid
            .ok_or_else(|| Error::data(format!("row {} has no cognate id", row.id)))?;
        if assignment.insert((&row.doculect, &row.concept), cogid).is_some() {
            return Err(Error::data(format!(
                "row {}: several entries for ({}, {}); polymorphic characters are not supported",
                row.id, row.doculect, row.concept
            )));
        }
        let c = wordlist.concepts().get_index_of(&row.concept).expect("declared concept");
        classes.entry(c).or_default().insert(cogid);
        present.insert(&row.doculect);
    }
    let taxa: Vec<String> = wordlist
        .doculects()
        .iter()
        .filter(|d| present.contains(d.as_str()))
        .cloned()
        .collect();
    let columns: Vec<Column> = classes
        .into_iter()
        .flat_map(|(c, ids)| {
            let concept = wordlist.concepts()[c].clone();
            ids.into_iter().map(move |cogid| Column {
                concept: concept.clone(),
                cogid,
            })
        })
        .collect();
    let cells = taxa
        .iter()
        .map(|taxon| {
            columns
                .iter()
                .map(|col| match assignment.get(&(taxon.as_str(), col.concept.as_str())) {
                    None => Cell::Missing,
                    Some(&id) if id == col.cogid => Cell::One,
                    Some(_) => Cell::Zero,
                })
                .collect()
        })
        .collect();
    CharacterMatrix::new(taxa, columns, cells)
}

/// Removes columns whose non-missing cells are all equal; returns the
/// reduced matrix and the removed columns.
pub fn drop_constant_columns(matrix: &CharacterMatrix) -> (CharacterMatrix, Vec<Column>) {
    let keep: Vec<bool> = (0..matrix.n_columns())
        .map(|k| {
            let mut values = matrix.cells.iter().map(|r| r[k]).filter(|&c| c != Cell::Missing);
            let first = values.next();
            values.any(|c| Some(c) != first)
        })
        .collect();
    let removed = matrix
        .columns
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| !k)
        .map(|(c, _)| c.clone())
        .collect();
    let columns = matrix.columns.iter().zip(&keep).filter(|(_, &k)| k).map(|(c, _)| c.clone()).collect();
    let cells = matrix
        .cells
        .iter()
        .map(|r| r.iter().zip(&keep).filter(|(_, &k)| k).map(|(c, _)| *c).collect())
        .collect();
    let reduced = CharacterMatrix {
        taxa: matrix.taxa.clone(),
        columns,
        cells,
    };
    (reduced, removed)
}

fn concept_sets(wordlist: &Wordlist) -> Vec<BTreeSet<&str>> {
    let mut sets: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); wordlist.doculects().len()];
    for row in wordlist.rows() {
        let d = wordlist.doculects().get_index_of(&row.doculect).expect("declared doculect");
        sets[d].insert(&row.concept);
    }
    sets
}

/// Average mutual coverage: the mean, over unordered doculect pairs, of the
/// share of all concepts both doculects attest.
pub fn amc(wordlist: &Wordlist) -> Result<f64> {
    let n = wordlist.doculects().len();
    if n < 2 {
        return Err(Error::data(format!("mutual coverage needs at least 2 doculects, got {n}")));
    }
    let n_concepts = wordlist.concepts().len();
    if n_concepts == 0 {
        return Err(Error::data("mutual coverage needs at least 1 concept"));
    }
    let sets = concept_sets(wordlist);
    let mut shared: u64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            shared += sets[i].intersection(&sets[j]).count() as u64;
        }
    }
    let pairs = (n * (n - 1) / 2) as u64;
    Ok(shared as f64 / (pairs * n_concepts as u64) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub n_languages: usize,
    pub n_synsets: usize,
    pub langs_per_synset: f64,
    pub synsets_per_lang: f64,
    pub amc: f64,
}

impl DatasetStats {
    pub const TSV_HEADER: &'static str = "#langs.\t#synsets\t#langs. per synset\t#synsets per lang.\tAMC";

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{:.4}\t{:.4}\t{:.6}",
            self.n_languages, self.n_synsets, self.langs_per_synset, self.synsets_per_lang, self.amc
        )
    }

    pub fn to_tsv(&self) -> String {
        format!("{}\n{}\n", Self::TSV_HEADER, self.tsv_row())
    }
}

pub fn dataset_stats(wordlist: &Wordlist) -> Result<DatasetStats> {
    if wordlist.is_empty() {
        return Err(Error::data("statistics need a non-empty wordlist"));
    }
    let n_languages = wordlist.doculects().len();
    let n_synsets = wordlist.concepts().len();
    let rows = wordlist.len() as f64;
    Ok(DatasetStats {
        n_languages,
        n_synsets,
        langs_per_synset: rows / n_synsets as f64,
        synsets_per_lang: rows / n_languages as f64,
        amc: amc(wordlist)?,
    })
}

/// Doculect × concept presence grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityGrid {
    pub doculects: Vec<String>,
    pub concepts: Vec<String>,
    pub filled: Vec<Vec<bool>>,
}

impl SparsityGrid {
    pub fn filled_count(&self) -> usize {
        self.filled.iter().flatten().filter(|&&b| b).count()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("DOCULECT");
        for c in &self.concepts {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
        for (d, row) in self.doculects.iter().zip(&self.filled) {
            out.push_str(d);
            for &b in row {
                out.push_str(if b { "\t1" } else { "\t0" });
            }
            out.push('\n');
        }
        out
    }

    /// Black cell per filled (doculect, concept), 4×4 px each.
    pub fn to_svg(&self) -> String {
        const CELL: usize = 4;
        let (w, h) = (self.concepts.len() * CELL, self.doculects.len() * CELL);
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
        );
        for (r, row) in self.filled.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                if b {
                    let _ = writeln!(
                        out,
                        "<rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"black\"/>",
                        c * CELL,
                        r * CELL
                    );
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

pub fn sparsity_grid(wordlist: &Wordlist, doculects: &[String], concepts: &[String]) -> Result<SparsityGrid> {
    let d_index: HashMap<&str, usize> = doculects.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let c_index: HashMap<&str, usize> = concepts.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut filled = vec![vec![false; concepts.len()]; doculects.len()];
    for row in wordlist.rows() {
        let d = *d_index
            .get(row.doculect.as_str())
            .ok_or_else(|| Error::data(format!("doculect {} missing from row order", row.doculect)))?;
        let c = *c_index
            .get(row.concept.as_str())
            .ok_or_else(|| Error::data(format!("concept {} missing from column order", row.concept)))?;
        filled[d][c] = true;
    }
    Ok(SparsityGrid {
        doculects: doculects.to_vec(),
        concepts: concepts.to_vec(),
        filled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::WordRow;

    fn wl(rows: &[(&str, &str, u64)]) -> Wordlist {
        Wordlist::new(
            rows.iter()
                .enumerate()
                .map(|(i, (d, c, cog))| WordRow::new(i as u64 + 1, d, c, "x").with_cogid(*cog))
                .collect(),
        )
        .unwrap()
    }

    fn col(m: &CharacterMatrix, k: usize) -> String {
        (0..m.taxa().len()).map(|t| m.cell(t, k).symbol()).collect()
    }

    #[test]
    fn encoding_rule() {
        let w = wl(&[("L1", "hand", 1), ("L2", "hand", 1), ("L3", "hand", 2), ("L4", "foot", 3)]);
        let m = encode_binary(&w).unwrap();
        assert_eq!(m.taxa(), ["L1", "L2", "L3", "L4"]);
        assert_eq!(col(&m, 0), "110?");
        assert_eq!(col(&m, 1), "001?");
        assert_eq!(col(&m, 2), "???1");
    }

    #[test]
    fn trivial_encodings() {
        let m = encode_binary(&wl(&[("L1", "hand", 5)])).unwrap();
        assert_eq!(m.n_columns(), 1);
        assert_eq!(m.cell(0, 0), Cell::One);
        let empty = encode_binary(&Wordlist::default()).unwrap();
        assert_eq!((empty.taxa().len(), empty.n_columns()), (0, 0));
    }

    #[test]
    fn polymorphism_and_missing_cogid_rejected() {
        let rows = vec![
            WordRow::new(1, "L1", "hand", "a").with_cogid(1),
            WordRow::new(2, "L1", "hand", "b").with_cogid(2),
        ];
        assert!(encode_binary(&Wordlist::with_synonyms(rows).unwrap()).is_err());
        let rows = vec![WordRow::new(1, "L1", "hand", "a")];
        assert!(encode_binary(&Wordlist::new(rows).unwrap()).is_err());
    }

    #[test]
    fn constant_columns() {
        let m = CharacterMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            (1..=5).map(|i| Column { concept: "c".into(), cogid: i }).collect(),
            vec![
                "11101".chars().map(|c| Cell::from_symbol(c).unwrap()).collect(),
                "10100".chars().map(|c| Cell::from_symbol(c).unwrap()).collect(),
                "?0?1?".chars().map(|c| Cell::from_symbol(c).unwrap()).collect(),
            ],
        )
        .unwrap();
        let (reduced, removed) = drop_constant_columns(&m);
        assert_eq!(reduced.n_columns(), 3);
        assert_eq!(removed.iter().map(|c| c.cogid).collect::<Vec<_>>(), [1, 3]);
    }

    #[test]
    fn amc_examples() {
        let full = wl(&[
            ("L1", "A", 1), ("L1", "B", 1), ("L1", "C", 1), ("L1", "D", 1),
            ("L2", "A", 1), ("L2", "B", 1), ("L2", "C", 1), ("L2", "D", 1),
        ]);
        assert_eq!(amc(&full).unwrap(), 1.0);
        let disjoint = wl(&[("L1", "A", 1), ("L1", "B", 1), ("L2", "C", 1), ("L2", "D", 1)]);
        assert_eq!(amc(&disjoint).unwrap(), 0.0);
        let three = wl(&[
            ("L1", "A", 1), ("L1", "B", 1),
            ("L2", "B", 1), ("L2", "C", 1),
            ("L3", "A", 1), ("L3", "B", 1), ("L3", "C", 1), ("L3", "D", 1),
        ]);
        // pairs share B, AB and BC: (1 + 2 + 2) / (3 * 4)
        assert_eq!(amc(&three).unwrap(), 5.0 / 12.0);
        let third = wl(&[
            ("L1", "A", 1), ("L1", "B", 1),
            ("L2", "C", 1), ("L2", "D", 1),
            ("L3", "A", 1), ("L3", "B", 1), ("L3", "C", 1), ("L3", "D", 1),
        ]);
        assert_eq!(amc(&third).unwrap(), 1.0 / 3.0);
        assert!(amc(&wl(&[("L1", "A", 1)])).is_err());
    }

    #[test]
    fn stats_of_complete_toy() {
        let w = wl(&[("L1", "A", 1), ("L1", "B", 1), ("L2", "A", 1), ("L2", "B", 2)]);
        let s = dataset_stats(&w).unwrap();
        assert_eq!(s, DatasetStats { n_languages: 2, n_synsets: 2, langs_per_synset: 2.0, synsets_per_lang: 2.0, amc: 1.0 });
        assert!(dataset_stats(&wl(&[("L1", "A", 1)])).is_err());
    }

    #[test]
    fn sparsity() {
        let w = wl(&[("L1", "A", 1), ("L1", "B", 1), ("L2", "A", 1), ("L2", "B", 2)]);
        let d: Vec<String> = w.doculects().iter().cloned().collect();
        let c: Vec<String> = w.concepts().iter().cloned().collect();
        let g = sparsity_grid(&w, &d, &c).unwrap();
        assert_eq!(g.filled_count(), 4);
        assert_eq!(g.to_svg().matches("fill=\"black\"").count(), 4);
        assert_eq!(g.to_tsv(), "DOCULECT\tA\tB\nL1\t1\t1\nL2\t1\t1\n");
        assert!(sparsity_grid(&w, &d[..1], &c).is_err());
        let empty = sparsity_grid(&Wordlist::default(), &[], &[]).unwrap();
        assert_eq!(empty.filled_count(), 0);
    }

    #[test]
    fn writers() {
        let w = wl(&[("L1", "A", 1), ("L2", "A", 2)]);
        let m = encode_binary(&w).unwrap();
        assert_eq!(m.to_phylip().unwrap(), "2 2\nL1 10\nL2 01\n");
        assert_eq!(CharacterMatrix::from_phylip(&m.to_phylip().unwrap(), &m.columns_meta()).unwrap(), m);
        assert_eq!(CharacterMatrix::from_nexus(&m.to_nexus().unwrap(), &m.columns_meta()).unwrap(), m);
        let bad = CharacterMatrix::new(vec!["a b".into()], vec![], vec![vec![]]).unwrap();
        assert!(bad.to_phylip().is_err());
        assert!(bad.to_nexus().is_err());
    }
}
