use crate::geometry::{Aabb, Vec3};
use serde::{Deserialize, Serialize};

use super::SimError;

pub const DEFAULT_HFOV: f64 = 1.57;
pub const DEFAULT_IMAGE_SIZE: [u32; 2] = [512, 512];
const MIN_FORWARD: f64 = 1e-9;
/// Near plane used when clipping box edges that cross behind the camera.
const NEAR_PLANE: f64 = 1e-3;

/// Pixel box `(x1, y1, x2, y2)`, top-left origin.
pub type BboxPx = [f64; 4];
/// Box on the integer `[0, 1000]` grid, same corner order.
pub type BboxNorm = [u32; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: [f64; 3],
    pub yaw: f64,
    pub pitch: f64,
    pub hfov: f64,
    pub image_size: [u32; 2],
}

impl CameraPose {
    pub fn new(position: Vec3, yaw: f64, pitch: f64) -> Self {
        Self {
            position: position.to_array(),
            yaw,
            pitch,
            hfov: DEFAULT_HFOV,
            image_size: DEFAULT_IMAGE_SIZE,
        }
    }

    pub fn origin(&self) -> Vec3 {
        Vec3::from_array(self.position)
    }

    pub fn width(&self) -> f64 {
        self.image_size[0] as f64
    }

    pub fn height(&self) -> f64 {
        self.image_size[1] as f64
    }

    pub fn focal(&self) -> f64 {
        (self.width() / 2.0) / (self.hfov / 2.0).tan()
    }

    pub fn diagonal_px(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// `(forward, right, up)` unit vectors in world coordinates.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let (sy, cy) = self.yaw.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let f = Vec3::new(cp * cy, cp * sy, sp);
        let r = Vec3::new(sy, -cy, 0.0);
        (f, r, r.cross(f))
    }

    /// Coordinates of world point `p` in the camera-forward frame.
    pub fn to_camera_frame(&self, p: Vec3) -> Vec3 {
        let (f, r, u) = self.basis();
        let d = p - self.origin();
        Vec3::new(d.dot(f), d.dot(r), d.dot(u))
    }

    /// World point from camera-forward frame coordinates.
    pub fn from_camera_frame(&self, c: Vec3) -> Vec3 {
        let (f, r, u) = self.basis();
        self.origin() + f * c.x + r * c.y + u * c.z
    }

    fn pixel_of(&self, c: Vec3) -> (f64, f64) {
        let fl = self.focal();
        (
            self.width() / 2.0 + fl * c.y / c.x,
            self.height() / 2.0 - fl * c.z / c.x,
        )
    }

    /// Pixel coordinates and forward depth of a point, `None` behind the camera.
    pub fn project_point(&self, p: Vec3) -> Option<(f64, f64, f64)> {
        let c = self.to_camera_frame(p);
        if c.x <= MIN_FORWARD {
            return None;
        }
        let (u, v) = self.pixel_of(c);
        Some((u, v, c.x))
    }

    /// Unit world-space direction of the ray through pixel `(u, v)`.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Vec3 {
        let (f, r, up) = self.basis();
        let d = f * self.focal() + r * (u - self.width() / 2.0) + up * (self.height() / 2.0 - v);
        d.normalized()
    }

    fn clip(&self, x1: f64, y1: f64, x2: f64, y2: f64) -> Option<BboxPx> {
        let (w, h) = (self.width(), self.height());
        let b = [x1.max(0.0), y1.max(0.0), x2.min(w), y2.min(h)];
        (b[0] < b[2] && b[1] < b[3]).then_some(b)
    }

    /// Conservative square around a sphere's image, clipped to the image.
    pub fn project_bbox(&self, center: Vec3, radius: f64) -> Option<(BboxPx, f64)> {
        let c = self.to_camera_frame(center);
        if c.x <= MIN_FORWARD {
            return None;
        }
        let (u, v) = self.pixel_of(c);
        let half = self.focal() * radius / (c.x - radius).max(MIN_FORWARD);
        let b = self.clip(u - half, v - half, u + half, v + half)?;
        Some((b, center.distance(self.origin())))
    }

    /// Image-space bounds of an axis-aligned box, clipped to the image.
    pub fn project_aabb(&self, aabb: &Aabb) -> Option<BboxPx> {
        let corners = aabb.corners().map(|p| self.to_camera_frame(p));
        let mut pts: Vec<Vec3> = corners.iter().copied().filter(|c| c.x >= NEAR_PLANE).collect();
        for (a, b) in Aabb::EDGES {
            let (ca, cb) = (corners[a], corners[b]);
            if (ca.x < NEAR_PLANE) != (cb.x < NEAR_PLANE) {
                let t = (NEAR_PLANE - ca.x) / (cb.x - ca.x);
                pts.push(ca + (cb - ca) * t);
            }
        }
        if pts.is_empty() {
            return None;
        }
        let (mut x1, mut y1) = (f64::INFINITY, f64::INFINITY);
        let (mut x2, mut y2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in pts {
            let (u, v) = self.pixel_of(Vec3::new(c.x.max(NEAR_PLANE), c.y, c.z));
            x1 = x1.min(u);
            y1 = y1.min(v);
            x2 = x2.max(u);
            y2 = y2.max(v);
        }
        self.clip(x1, y1, x2, y2)
    }

    /// World point at range `depth_m` along the ray through `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64, depth_m: f64) -> Result<Vec3, SimError> {
        if !(depth_m.is_finite() && depth_m > 0.0) {
            return Err(SimError::InvalidDepth(depth_m));
        }
        Ok(self.origin() + self.pixel_ray(u, v) * depth_m)
    }

    pub fn bbox_norm(&self, b: &BboxPx) -> BboxNorm {
        to_norm(b, self.image_size)
    }

    /// Raw-pixel box for a normalized one (inverse of [`to_norm`] up to flooring).
    pub fn bbox_px(&self, b: &BboxNorm) -> BboxPx {
        from_norm(b, self.image_size)
    }
}

pub fn to_norm(b: &BboxPx, size: [u32; 2]) -> BboxNorm {
    let conv = |px: f64, s: u32| ((px * 1000.0 / s as f64).floor()).clamp(0.0, 1000.0) as u32;
    [
        conv(b[0], size[0]),
        conv(b[1], size[1]),
        conv(b[2], size[0]),
        conv(b[3], size[1]),
    ]
}

pub fn from_norm(b: &BboxNorm, size: [u32; 2]) -> BboxPx {
    let conv = |n: u32, s: u32| n as f64 * s as f64 / 1000.0;
    [
        conv(b[0], size[0]),
        conv(b[1], size[1]),
        conv(b[2], size[0]),
        conv(b[3], size[1]),
    ]
}

/// Midpoint of a pixel box.
pub fn bbox_center(b: &BboxPx) -> (f64, f64) {
    ((b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis_camera() -> CameraPose {
        CameraPose {
            position: [0.0, 0.0, 0.0],
            yaw: 0.0,
            pitch: 0.0,
            hfov: std::f64::consts::FRAC_PI_2,
            image_size: [512, 512],
        }
    }

    #[test]
    fn optical_axis_hits_image_center() {
        let cam = axis_camera();
        let p = cam.from_camera_frame(Vec3::new(2.0, 0.0, 0.0));
        let (u, v, d) = cam.project_point(p).unwrap();
        assert!((u - 256.0).abs() < 1e-9 && (v - 256.0).abs() < 1e-9);
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn offset_point_uses_focal_256() {
        let cam = axis_camera();
        assert!((cam.focal() - 256.0).abs() < 1e-9);
        let p = cam.from_camera_frame(Vec3::new(2.0, 0.5, 0.0));
        let (b, _) = cam.project_bbox(p, 1e-9).unwrap();
        let (u, _) = bbox_center(&b);
        assert!((u - 320.0).abs() < 1e-6, "{u}");
    }

    #[test]
    fn zero_depth_is_rejected() {
        let cam = axis_camera();
        assert!(cam.project_bbox(cam.from_camera_frame(Vec3::new(0.0, 0.3, 0.1)), 0.05).is_none());
        assert!(cam.project_bbox(cam.from_camera_frame(Vec3::new(-1.0, 0.0, 0.0)), 0.05).is_none());
    }

    #[test]
    fn center_pixel_unprojects_on_axis() {
        let cam = axis_camera();
        let p = cam.unproject(256.0, 256.0, 2.0).unwrap();
        let c = cam.to_camera_frame(p);
        assert!((c.x - 2.0).abs() < 1e-12 && c.y.abs() < 1e-12 && c.z.abs() < 1e-12);
        assert!(matches!(cam.unproject(256.0, 256.0, f64::INFINITY), Err(SimError::InvalidDepth(_))));
        assert!(cam.unproject(256.0, 256.0, 0.0).is_err());
    }

    #[test]
    fn norm_floors_and_clamps() {
        assert_eq!(to_norm(&[0.0, 255.9, 511.99, 512.0], [512, 512]), [0, 499, 999, 1000]);
    }

    #[test]
    fn box_straddling_camera_plane_is_clipped() {
        let cam = axis_camera();
        let b = Aabb::new(Vec3::new(-1.0, -0.2, -0.5), Vec3::new(1.0, 0.2, -0.3));
        let px = cam.project_aabb(&b).unwrap();
        assert!(px[3] <= 512.0 && px[1] > 256.0);
    }
}
