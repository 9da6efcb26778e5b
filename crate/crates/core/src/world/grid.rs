use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::VecDeque;

/// Grid cell; `i` indexes x (columns), `j` indexes y (rows).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

impl Cell {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

/// Boolean occupancy grid, `true` = blocked.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            blocked: vec![false; width * height],
        }
    }

    /// Free interior with a one-cell wall around the border.
    pub fn walled(width: usize, height: usize) -> Self {
        let mut g = Self::new(width, height);
        for i in 0..width {
            g.set_blocked(Cell::new(i, 0), true);
            g.set_blocked(Cell::new(i, height - 1), true);
        }
        for j in 0..height {
            g.set_blocked(Cell::new(0, j), true);
            g.set_blocked(Cell::new(width - 1, j), true);
        }
        g
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    pub fn index(&self, c: Cell) -> usize {
        c.j * self.width + c.i
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn in_bounds(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        self.blocked[self.index(c)]
    }

    pub fn is_free(&self, c: Cell) -> bool {
        !self.is_blocked(c)
    }

    pub fn set_blocked(&mut self, c: Cell, blocked: bool) {
        let idx = self.index(c);
        self.blocked[idx] = blocked;
    }

    /// 8-connected free neighbours with step cost in cells. Diagonal moves
    /// require both orthogonal neighbours to be free (no corner cutting).
    pub fn free_neighbors(&self, c: Cell) -> impl Iterator<Item = (Cell, f64)> + '_ {
        const STEPS: [(isize, isize); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        STEPS.iter().filter_map(move |&(di, dj)| {
            let (ni, nj) = (c.i as isize + di, c.j as isize + dj);
            if !self.in_bounds(ni, nj) {
                return None;
            }
            let n = Cell::new(ni as usize, nj as usize);
            if self.is_blocked(n) {
                return None;
            }
            if di != 0 && dj != 0 {
                let a = Cell::new(ni as usize, c.j);
                let b = Cell::new(c.i, nj as usize);
                if self.is_blocked(a) || self.is_blocked(b) {
                    return None;
                }
                Some((n, std::f64::consts::SQRT_2))
            } else {
                Some((n, 1.0))
            }
        })
    }

    /// Free cells reachable from `start` (mask indexed like the grid).
    pub fn flood_fill(&self, start: Cell) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        if self.is_blocked(start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[self.index(start)] = true;
        while let Some(c) = queue.pop_front() {
            for (n, _) in self.free_neighbors(c) {
                let idx = self.index(n);
                if !seen[idx] {
                    seen[idx] = true;
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Mask of the largest connected free component. Ties go to the
    /// component containing the lowest cell index.
    pub fn largest_component(&self) -> Vec<bool> {
        let mut label = vec![usize::MAX; self.len()];
        let mut best: Option<(usize, usize)> = None; // (size, label)
        let mut next = 0;
        for idx in 0..self.len() {
            if self.blocked[idx] || label[idx] != usize::MAX {
                continue;
            }
            let mask = self.flood_fill(self.cell_at(idx));
            let mut size = 0;
            for (k, &m) in mask.iter().enumerate() {
                if m {
                    label[k] = next;
                    size += 1;
                }
            }
            if best.is_none_or(|(s, _)| size > s) {
                best = Some((size, next));
            }
            next += 1;
        }
        match best {
            Some((_, l)) => label.iter().map(|&x| x == l).collect(),
            None => vec![false; self.len()],
        }
    }

    fn rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|j| {
                (0..self.width)
                    .map(|i| if self.is_blocked(Cell::new(i, j)) { '#' } else { '.' })
                    .collect()
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    width: usize,
    height: usize,
    rows: Vec<String>,
}

impl Serialize for OccupancyGrid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GridRepr {
            width: self.width,
            height: self.height,
            rows: self.rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OccupancyGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = GridRepr::deserialize(d)?;
        if repr.rows.len() != repr.height {
            return Err(D::Error::custom("row count does not match height"));
        }
        let mut blocked = Vec::with_capacity(repr.width * repr.height);
        for row in &repr.rows {
            if row.chars().count() != repr.width {
                return Err(D::Error::custom("row length does not match width"));
            }
            for ch in row.chars() {
                match ch {
                    '#' => blocked.push(true),
                    '.' => blocked.push(false),
                    other => return Err(D::Error::custom(format!("bad grid char {other:?}"))),
                }
            }
        }
        Ok(Self {
            width: repr.width,
            height: repr.height,
            blocked,
        })
    }
}
