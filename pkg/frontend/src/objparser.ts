// OBJ text -> typed arrays for the viewer. Supports triangles and quad
// fans, 1-based and negative indices, and v/vt/vn face tokens.

export interface ParsedMesh {
  positions: Float32Array; // xyz per vertex
  indices: Uint32Array; // triangle list
  vertexCount: number;
  triangleCount: number;
}

export function parseObj(text: string): ParsedMesh {
  const positions: number[] = [];
  const indices: number[] = [];
  const lines = text.split("\n");
  for (let ln = 0; ln < lines.length; ln++) {
    const line = lines[ln].trim();
    if (!line || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    if (parts[0] === "v") {
      if (parts.length < 4) throw new Error(`line ${ln + 1}: short vertex`);
      positions.push(Number(parts[1]), Number(parts[2]), Number(parts[3]));
      if (positions.slice(-3).some(Number.isNaN)) {
        throw new Error(`line ${ln + 1}: bad vertex number`);
      }
    } else if (parts[0] === "f") {
      const verts = parts.slice(1).map((tok) => {
        const idx = Number(tok.split("/")[0]);
        if (!Number.isInteger(idx) || idx === 0) {
          throw new Error(`line ${ln + 1}: bad face index ${tok}`);
        }
        return idx > 0 ? idx - 1 : positions.length / 3 + idx;
      });
      for (let k = 1; k + 1 < verts.length; k++) {
        indices.push(verts[0], verts[k], verts[k + 1]);
      }
    }
  }
  const vertexCount = positions.length / 3;
  for (const i of indices) {
    if (i < 0 || i >= vertexCount) throw new Error(`face index ${i + 1} out of range`);
  }
  return {
    positions: new Float32Array(positions),
    indices: new Uint32Array(indices),
    vertexCount,
    triangleCount: indices.length / 3,
  };
}

export function boundingBox(mesh: ParsedMesh): { min: number[]; max: number[] } {
  const min = [Infinity, Infinity, Infinity];
  const max = [-Infinity, -Infinity, -Infinity];
  for (let i = 0; i < mesh.positions.length; i += 3) {
    for (let a = 0; a < 3; a++) {
      min[a] = Math.min(min[a], mesh.positions[i + a]);
      max[a] = Math.max(max[a], mesh.positions[i + a]);
    }
  }
  return { min, max };
}
