// three.js mesh viewer with orbit/zoom and a sketch overlay rendered from
// the generation view, so the result can be compared against the input.

import * as THREE from "three";
import type { ParsedMesh } from "./objparser";
import type { ViewInfo } from "./api";

export class MeshViewer {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private mesh: THREE.Mesh | null = null;
  private dragging = false;
  private lastX = 0;
  private lastY = 0;
  private azimuth = 0;
  private elevation = 15;
  private distance = 2.5;

  constructor(private container: HTMLElement, size = 400) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(size, size);
    this.renderer.setClearColor(0xffffff);
    container.appendChild(this.renderer.domElement);
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.01, 100);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.35));
    const key = new THREE.DirectionalLight(0xffffff, 1.0);
    key.position.set(1, 1, 2);
    this.scene.add(key);
    this.bindControls();
    this.updateCamera();
    this.animate();
  }

  /** Align the viewer camera with a generation view for overlay comparison. */
  setView(view: ViewInfo): void {
    this.azimuth = view.azimuth;
    this.elevation = view.elevation;
    this.distance = view.distance;
    this.updateCamera();
  }

  showMesh(parsed: ParsedMesh): void {
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
    }
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.BufferAttribute(parsed.positions, 3));
    geometry.setIndex(new THREE.BufferAttribute(parsed.indices, 1));
    geometry.computeVertexNormals();
    const material = new THREE.MeshStandardMaterial({
      color: 0x8899bb,
      side: THREE.DoubleSide,
    });
    this.mesh = new THREE.Mesh(geometry, material);
    this.scene.add(this.mesh);
  }

  private bindControls(): void {
    const el = this.renderer.domElement;
    el.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      this.lastX = e.clientX;
      this.lastY = e.clientY;
    });
    window.addEventListener("pointerup", () => (this.dragging = false));
    window.addEventListener("pointermove", (e) => {
      if (!this.dragging) return;
      this.azimuth += (e.clientX - this.lastX) * 0.5;
      this.elevation = Math.max(
        -89,
        Math.min(89, this.elevation + (e.clientY - this.lastY) * 0.5),
      );
      this.lastX = e.clientX;
      this.lastY = e.clientY;
      this.updateCamera();
    });
    el.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.distance = Math.max(1.5, Math.min(8, this.distance + e.deltaY * 0.002));
      this.updateCamera();
    });
  }

  private updateCamera(): void {
    const az = (this.azimuth * Math.PI) / 180;
    const el = (this.elevation * Math.PI) / 180;
    this.camera.position.set(
      this.distance * Math.cos(el) * Math.sin(az),
      this.distance * Math.sin(el),
      this.distance * Math.cos(el) * Math.cos(az),
    );
    this.camera.lookAt(0, 0, 0);
  }

  private animate = (): void => {
    requestAnimationFrame(this.animate);
    this.renderer.render(this.scene, this.camera);
  };
}
