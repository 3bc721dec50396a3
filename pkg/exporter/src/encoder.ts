// Sentence encoders behind one interface. The operator names the encoder;
// the identifier lands in the manifest so exports stay attributable.
//
// "test-hash-<dim>" is a deterministic offline stand-in for plumbing tests
// and smoke runs. Anything else is treated as a pretrained model id and
// loaded through @xenova/transformers (install it and fetch the model
// before running; mean pooling, normalized output).

export interface SentenceEncoder {
  readonly id: string;
  readonly dim: number;
  encode(texts: string[]): Promise<number[][]>;
}

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function testHashEncoder(dim = 384): SentenceEncoder {
  return {
    id: `test-hash-${dim}`,
    dim,
    async encode(texts: string[]): Promise<number[][]> {
      return texts.map((text) => {
        const next = mulberry32(fnv1a(text));
        const vec = new Array<number>(dim);
        let norm = 0;
        for (let i = 0; i < dim; i++) {
          vec[i] = next() * 2 - 1;
          norm += vec[i] * vec[i];
        }
        norm = Math.sqrt(norm) || 1;
        return vec.map((v) => v / norm);
      });
    },
  };
}

async function transformersEncoder(modelId: string): Promise<SentenceEncoder> {
  let pipelineFactory: (task: string, model: string) => Promise<any>;
  try {
    const mod = await import("@xenova/transformers" as string);
    pipelineFactory = mod.pipeline;
  } catch (err) {
    throw new Error(
      `encoder '${modelId}' needs the optional @xenova/transformers package: ${err}`
    );
  }
  const extractor = await pipelineFactory("feature-extraction", modelId);
  const probe = await extractor(["probe"], { pooling: "mean", normalize: true });
  const dim = probe.dims[probe.dims.length - 1];
  return {
    id: modelId,
    dim,
    async encode(texts: string[]): Promise<number[][]> {
      const output = await extractor(texts, { pooling: "mean", normalize: true });
      return output.tolist();
    },
  };
}

export async function resolveEncoder(name: string): Promise<SentenceEncoder> {
  const match = /^test-hash-(\d+)$/.exec(name);
  if (match) {
    return testHashEncoder(Number(match[1]));
  }
  return transformersEncoder(name);
}
