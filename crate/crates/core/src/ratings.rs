//! Plain ratings-file ingestion.
//!
//! `ratings` has header `user_group,movie_id,rating`; `genres` has header
//! `movie_id,genres` with genres separated by `|`. Group-level ratings are
//! plain averages; unrated (group, movie) pairs get 0.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::bandit::ContextObjective;
use crate::objectives::{make_concave_over_modular, make_genre_square, median, BPObjective, GroundSet};

#[derive(Debug, Error)]
pub enum RatingsError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed row at line {line}: {message}")]
    Malformed { path: String, line: u64, message: String },
    #[error("movie {movie} is rated but has no genre entry")]
    MissingMovie { movie: String },
    #[error("{path}: no rows")]
    Empty { path: String },
}

#[derive(Deserialize)]
struct RatingRow {
    user_group: String,
    movie_id: String,
    rating: f64,
}

#[derive(Deserialize)]
struct GenreRow {
    movie_id: String,
    genres: String,
}

/// Averaged ratings and genre memberships over the rated movies.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsTable {
    /// Group labels in sorted order.
    pub groups: Vec<String>,
    /// Movie ids in sorted order; these are the items.
    pub movies: Vec<String>,
    /// Genre labels in sorted order.
    pub genres: Vec<String>,
    /// `ratings[group][movie]`.
    pub ratings: Vec<Vec<f64>>,
    /// `memberships[movie][genre]`.
    pub memberships: Vec<Vec<bool>>,
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>, RatingsError> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => RatingsError::Io { path: path.display().to_string(), source },
            other => RatingsError::Malformed { path: path.display().to_string(), line: 0, message: format!("{other:?}") },
        })
}

fn malformed(path: &Path, e: csv::Error) -> RatingsError {
    let line = e.position().map_or(0, |p| p.line());
    RatingsError::Malformed { path: path.display().to_string(), line, message: e.to_string() }
}

pub fn load_ratings_matrix(ratings_path: &Path, genres_path: &Path) -> Result<RatingsTable, RatingsError> {
    // (group, movie) -> (sum, count)
    let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    let mut rdr = reader(ratings_path)?;
    for row in rdr.deserialize::<RatingRow>() {
        let row = row.map_err(|e| malformed(ratings_path, e))?;
        if !row.rating.is_finite() {
            return Err(RatingsError::Malformed {
                path: ratings_path.display().to_string(),
                line: rdr.position().line(),
                message: format!("rating {} is not finite", row.rating),
            });
        }
        let e = sums.entry((row.user_group, row.movie_id)).or_insert((0.0, 0));
        e.0 += row.rating;
        e.1 += 1;
    }
    if sums.is_empty() {
        return Err(RatingsError::Empty { path: ratings_path.display().to_string() });
    }

    let mut movie_genres: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for row in reader(genres_path)?.deserialize::<GenreRow>() {
        let row = row.map_err(|e| malformed(genres_path, e))?;
        let list = row.genres.split('|').map(str::trim).filter(|g| !g.is_empty()).map(String::from).collect();
        movie_genres.insert(row.movie_id, list);
    }

    let groups: Vec<String> = sums.keys().map(|(g, _)| g.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let movies: Vec<String> = sums.keys().map(|(_, m)| m.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut genres = std::collections::BTreeSet::new();
    for m in &movies {
        let list = movie_genres.get(m).ok_or_else(|| RatingsError::MissingMovie { movie: m.clone() })?;
        genres.extend(list.iter().cloned());
    }
    let genres: Vec<String> = genres.into_iter().collect();
    let gidx = |g: &str| genres.binary_search_by(|x| x.as_str().cmp(g)).expect("collected above");
    let midx = |m: &str| movies.binary_search_by(|x| x.as_str().cmp(m)).expect("collected above");

    let memberships = movies
        .iter()
        .map(|m| {
            let mut row = vec![false; genres.len()];
            for g in &movie_genres[m] {
                row[gidx(g)] = true;
            }
            row
        })
        .collect();
    let mut ratings = vec![vec![0.0; movies.len()]; groups.len()];
    for ((g, m), (sum, count)) in &sums {
        let gi = groups.binary_search(g).expect("collected above");
        ratings[gi][midx(m)] = sum / *count as f64;
    }
    Ok(RatingsTable { groups, movies, genres, ratings, memberships })
}

/// One BP objective per group: modular ratings term, concave-over-genres
/// submodular term and genre-square supermodular term. Items are described
/// by their genre indicators followed by a constant 1.
pub fn ratings_objectives(
    table: &RatingsTable,
    session_length: usize,
    modular_scale: f64,
    dominance: f64,
) -> crate::Result<(GroundSet, Vec<ContextObjective>)> {
    let features = table
        .memberships
        .iter()
        .map(|row| row.iter().map(|&b| if b { 1.0 } else { 0.0 }).chain([1.0]).collect())
        .collect();
    let ground = GroundSet::new(features)?;
    let reference = Some(session_length.min(table.movies.len()));
    let objectives = table
        .groups
        .iter()
        .zip(&table.ratings)
        .map(|(name, r)| -> crate::Result<ContextObjective> {
            let tau = median(r);
            let modular = r.iter().map(|x| modular_scale * x / 5.0).collect();
            let scaled: Vec<f64> = r.iter().map(|x| x / 5.0).collect();
            let f = make_concave_over_modular(&table.memberships, r, tau)?;
            let g = make_genre_square(&table.memberships, &scaled, tau / 5.0)?;
            let bp = BPObjective::balanced(modular, f, g, 1.0, dominance, reference)?;
            Ok(ContextObjective::bp(name.clone(), bp)?)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok((ground, objectives))
}
