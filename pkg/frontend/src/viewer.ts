// Side-by-side 3D scatter of the original and the regeneration: plain point
// sprites with size attenuation, orbit controls, no surface reconstruction.

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

const ORIGINAL_COLOR = 0x4da3ff;
const REGEN_COLOR = 0xff8a3d;

function toGeometry(points: number[][]): THREE.BufferGeometry {
  const geometry = new THREE.BufferGeometry();
  const flat = new Float32Array(points.length * 3);
  for (let i = 0; i < points.length; i++) {
    flat[3 * i] = points[i][0];
    flat[3 * i + 1] = points[i][1];
    flat[3 * i + 2] = points[i][2];
  }
  geometry.setAttribute("position", new THREE.BufferAttribute(flat, 3));
  return geometry;
}

class ScatterPane {
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer;
  private controls: OrbitControls;
  private cloud: THREE.Points | null = null;
  private material: THREE.PointsMaterial;

  constructor(container: HTMLElement, color: number) {
    const w = container.clientWidth || 400;
    const h = container.clientHeight || 400;
    this.camera = new THREE.PerspectiveCamera(50, w / h, 0.01, 100);
    this.camera.position.set(1.8, 1.4, 1.8);
    this.camera.up.set(0, 0, 1); // the data's vertical axis is z
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(w, h);
    this.renderer.setClearColor(0x10141a);
    container.appendChild(this.renderer.domElement);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.enableDamping = true;
    this.material = new THREE.PointsMaterial({ color, size: 0.025, sizeAttenuation: true });
    this.scene.add(new THREE.AxesHelper(1.2));

    const animate = () => {
      requestAnimationFrame(animate);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    animate();

    new ResizeObserver(() => {
      const width = container.clientWidth;
      const height = container.clientHeight;
      if (width && height) {
        this.camera.aspect = width / height;
        this.camera.updateProjectionMatrix();
        this.renderer.setSize(width, height);
      }
    }).observe(container);
  }

  setPoints(points: number[][]): void {
    if (this.cloud) {
      this.scene.remove(this.cloud);
      this.cloud.geometry.dispose();
    }
    this.cloud = new THREE.Points(toGeometry(points), this.material);
    this.scene.add(this.cloud);
  }

  clear(): void {
    if (this.cloud) {
      this.scene.remove(this.cloud);
      this.cloud.geometry.dispose();
      this.cloud = null;
    }
  }
}

export class DualViewer {
  private original: ScatterPane;
  private regen: ScatterPane;

  constructor(originalContainer: HTMLElement, regenContainer: HTMLElement) {
    this.original = new ScatterPane(originalContainer, ORIGINAL_COLOR);
    this.regen = new ScatterPane(regenContainer, REGEN_COLOR);
  }

  setOriginal(points: number[][]): void {
    this.original.setPoints(points);
  }

  setRegen(points: number[][]): void {
    this.regen.setPoints(points);
  }

  clearRegen(): void {
    this.regen.clear();
  }
}
