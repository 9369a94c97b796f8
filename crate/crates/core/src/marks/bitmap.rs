use std::collections::VecDeque;

/// Row-major binary image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Bitmap {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let mut b = Self::new(width, height);
        for v in 0..height {
            for u in 0..width {
                if f(u, v) {
                    b.set(u, v, true);
                }
            }
        }
        b
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, u: u32, v: u32) -> bool {
        self.bits[v as usize * self.width as usize + u as usize]
    }

    /// Out-of-range coordinates read as unset.
    pub fn get_signed(&self, u: i64, v: i64) -> bool {
        u >= 0
            && v >= 0
            && u < self.width as i64
            && v < self.height as i64
            && self.get(u as u32, v as u32)
    }

    pub fn set(&mut self, u: u32, v: u32, value: bool) {
        let w = self.width as usize;
        self.bits[v as usize * w + u as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    fn zip_with(&self, other: &Bitmap, f: impl Fn(bool, bool) -> bool) -> Bitmap {
        assert_eq!(self.dimensions(), other.dimensions(), "bitmap sizes differ");
        Bitmap {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn and(&self, other: &Bitmap) -> Bitmap {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Bitmap) -> Bitmap {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &Bitmap) -> Bitmap {
        self.zip_with(other, |a, b| a && !b)
    }

    /// Separable running max/min over a `(2r+1)` square window. Pixels
    /// outside the image take the value `outside`.
    fn square_filter(&self, r: u32, want: bool, outside: bool) -> Bitmap {
        if r == 0 {
            return self.clone();
        }
        let (w, h, r) = (self.width as i64, self.height as i64, r as i64);
        let pass = |src: &Vec<bool>, horizontal: bool| -> Vec<bool> {
            let mut out = vec![false; src.len()];
            for v in 0..h {
                for u in 0..w {
                    let mut hit = false;
                    for d in -r..=r {
                        let (uu, vv) = if horizontal { (u + d, v) } else { (u, v + d) };
                        let value = if uu < 0 || vv < 0 || uu >= w || vv >= h {
                            outside
                        } else {
                            src[(vv * w + uu) as usize]
                        };
                        if value == want {
                            hit = true;
                            break;
                        }
                    }
                    out[(v * w + u) as usize] = if hit { want } else { !want };
                }
            }
            out
        };
        let rows = pass(&self.bits, true);
        Bitmap {
            width: self.width,
            height: self.height,
            bits: pass(&rows, false),
        }
    }

    /// Dilation by a `(2r+1)x(2r+1)` square (Chebyshev radius `r`).
    pub fn dilate(&self, r: u32) -> Bitmap {
        self.square_filter(r, true, false)
    }

    /// Erosion by a `(2r+1)x(2r+1)` square; the border counts as set so
    /// shapes touching the image edge are not eaten from outside.
    pub fn erode(&self, r: u32) -> Bitmap {
        self.square_filter(r, false, true)
    }

    /// Morphological closing with a 3x3 square.
    pub fn close3(&self) -> Bitmap {
        self.dilate(1).erode(1)
    }

    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut su, mut sv, mut n) = (0.0, 0.0, 0usize);
        for (u, v) in self.iter_set() {
            su += u as f64;
            sv += v as f64;
            n += 1;
        }
        (n > 0).then(|| (su / n as f64, sv / n as f64))
    }

    /// Inclusive bounding rectangle `(u0, v0, u1, v1)` of the set pixels.
    pub fn bounds(&self) -> Option<(u32, u32, u32, u32)> {
        self.iter_set().fold(None, |acc, (u, v)| {
            Some(match acc {
                None => (u, v, u, v),
                Some((a, b, c, d)) => (a.min(u), b.min(v), c.max(u), d.max(v)),
            })
        })
    }

    /// Set pixel nearest `(u, v)` by Euclidean distance, first in row-major
    /// order on ties.
    pub fn nearest_set(&self, u: f64, v: f64) -> Option<(u32, u32)> {
        self.iter_set().fold(None, |best: Option<((u32, u32), f64)>, (pu, pv)| {
            let d = (pu as f64 - u).powi(2) + (pv as f64 - v).powi(2);
            match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some(((pu, pv), d)),
            }
        })
        .map(|(p, _)| p)
    }

    /// Unset pixels 4-connected to the image border.
    pub fn outside_region(&self) -> Bitmap {
        let mut out = Bitmap::new(self.width, self.height);
        let mut queue = VecDeque::new();
        let seed = |u: u32, v: u32, out: &mut Bitmap, q: &mut VecDeque<(u32, u32)>| {
            if !self.get(u, v) && !out.get(u, v) {
                out.set(u, v, true);
                q.push_back((u, v));
            }
        };
        for u in 0..self.width {
            seed(u, 0, &mut out, &mut queue);
            seed(u, self.height - 1, &mut out, &mut queue);
        }
        for v in 0..self.height {
            seed(0, v, &mut out, &mut queue);
            seed(self.width - 1, v, &mut out, &mut queue);
        }
        while let Some((u, v)) = queue.pop_front() {
            let (u, v) = (u as i64, v as i64);
            for (du, dv) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (nu, nv) = (u + du, v + dv);
                if nu >= 0 && nv >= 0 && nu < self.width as i64 && nv < self.height as i64 {
                    seed(nu as u32, nv as u32, &mut out, &mut queue);
                }
            }
        }
        out
    }

    /// Set pixels with a 4-neighbor in the outside region (or on the image
    /// border): the outer boundary, ignoring holes.
    pub fn outer_boundary(&self) -> Bitmap {
        let outside = self.outside_region();
        let mut out = Bitmap::new(self.width, self.height);
        for (u, v) in self.iter_set() {
            let (iu, iv) = (u as i64, v as i64);
            let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(du, dv)| {
                let (nu, nv) = (iu + du, iv + dv);
                nu < 0
                    || nv < 0
                    || nu >= self.width as i64
                    || nv >= self.height as i64
                    || outside.get(nu as u32, nv as u32)
            });
            if touches {
                out.set(u, v, true);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(size: u32, lo: u32, hi: u32) -> Bitmap {
        Bitmap::from_fn(size, size, |u, v| (lo..hi).contains(&u) && (lo..hi).contains(&v))
    }

    #[test]
    fn dilate_single_pixel() {
        let b = Bitmap::from_fn(5, 5, |u, v| u == 2 && v == 2);
        assert_eq!(b.dilate(1).count(), 9);
    }

    #[test]
    fn erode_inverts_dilate_on_squares() {
        let b = square(30, 10, 20);
        assert_eq!(b.dilate(3).erode(3), b);
    }

    #[test]
    fn closing_fills_single_gaps() {
        let mut b = square(20, 5, 15);
        b.set(10, 10, false);
        assert_eq!(b.close3(), square(20, 5, 15));
    }

    #[test]
    fn boundary_ignores_holes() {
        let mut b = square(20, 4, 16);
        for u in 8..12 {
            for v in 8..12 {
                b.set(u, v, false);
            }
        }
        // perimeter of a 12x12 square
        assert_eq!(b.outer_boundary().count(), 44);
    }

    #[test]
    fn nearest_set_pixel_for_ring() {
        let ring = square(20, 4, 16).and_not(&square(20, 6, 14));
        let (u, v) = ring.nearest_set(10.0, 10.0).unwrap();
        assert!(ring.get(u, v));
        assert_eq!((u, v), (14, 10));
    }
}
