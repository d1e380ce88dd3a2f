use std::collections::HashMap;

use crate::error::{Error, Result};

use super::coords::CoordinateTable;

/// Lattice 8-neighborhood of every location.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborMap {
    neighbors: Vec<Vec<usize>>,
}

impl NeighborMap {
    pub fn neighbors(&self, location: usize) -> &[usize] {
        &self.neighbors[location]
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Neighbors are the present points one lattice step away in latitude
/// and/or longitude. Points not in the table (land, dropped cells) never
/// appear. Longitude wraps when the lattice circles the globe.
pub fn build_neighbor_map(coords: &CoordinateTable) -> Result<NeighborMap> {
    let lattice = coords
        .lattice()
        .map_err(|reason| Error::Lattice(reason.to_string()))?;
    let index: HashMap<(i64, i64), usize> = lattice
        .cells
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();

    let neighbors = lattice
        .cells
        .iter()
        .enumerate()
        .map(|(me, &(row, col))| {
            let mut found: Vec<usize> = Vec::with_capacity(8);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let mut c = col + dc;
                    if let Some(n) = lattice.wrap_columns {
                        c = c.rem_euclid(n);
                    }
                    if let Some(&j) = index.get(&(row + dr, c)) {
                        if j != me {
                            found.push(j);
                        }
                    }
                }
            }
            found.sort_unstable();
            found.dedup();
            found
        })
        .collect();
    Ok(NeighborMap { neighbors })
}
