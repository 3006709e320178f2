/**
 * Minimal PPM (P6) / PGM (P5) raster codec.
 *
 * Binary netpbm is the one raster format simple enough to parse without a
 * native decoder, which keeps the exporter dependency-free on the image
 * side. Grayscale images are expanded to three channels on read.
 */

export interface RasterImage {
  width: number
  height: number
  /** RGB interleaved, one byte per channel */
  pixels: Uint8Array
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d
}

/** Reads the next whitespace-delimited header token, skipping # comments. */
function nextToken(buf: Uint8Array, offset: number): { token: string; next: number } {
  let i = offset
  for (;;) {
    while (i < buf.length && isSpace(buf[i])) i++
    if (buf[i] === 0x23) {
      while (i < buf.length && buf[i] !== 0x0a) i++
    } else {
      break
    }
  }
  const start = i
  while (i < buf.length && !isSpace(buf[i])) i++
  if (start === i) throw new Error('truncated netpbm header')
  return { token: Buffer.from(buf.slice(start, i)).toString('ascii'), next: i }
}

export function decodeNetpbm(data: Uint8Array): RasterImage {
  const magic = Buffer.from(data.slice(0, 2)).toString('ascii')
  if (magic !== 'P6' && magic !== 'P5') {
    throw new Error(`unsupported image format (expected P5/P6 netpbm, got ${JSON.stringify(magic)})`)
  }
  let pos = 2
  const w = nextToken(data, pos)
  const h = nextToken(data, w.next)
  const m = nextToken(data, h.next)
  const width = parseInt(w.token, 10)
  const height = parseInt(h.token, 10)
  const maxval = parseInt(m.token, 10)
  if (!(width > 0 && height > 0)) throw new Error('bad netpbm dimensions')
  if (maxval !== 255) throw new Error(`unsupported netpbm maxval ${maxval}`)
  const start = m.next + 1 // single whitespace byte after maxval
  const channels = magic === 'P6' ? 3 : 1
  const expected = width * height * channels
  const raw = data.slice(start, start + expected)
  if (raw.length !== expected) throw new Error('truncated netpbm pixel data')
  if (channels === 3) return { width, height, pixels: new Uint8Array(raw) }
  const rgb = new Uint8Array(expected * 3)
  for (let i = 0; i < expected; i++) {
    rgb[3 * i] = raw[i]
    rgb[3 * i + 1] = raw[i]
    rgb[3 * i + 2] = raw[i]
  }
  return { width, height, pixels: rgb }
}

export function encodePpm(image: RasterImage): Uint8Array {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, 'ascii')
  if (image.pixels.length !== image.width * image.height * 3) {
    throw new Error('pixel buffer does not match dimensions')
  }
  return Buffer.concat([header, Buffer.from(image.pixels)])
}
