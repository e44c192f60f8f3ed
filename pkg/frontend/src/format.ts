/**
 * Canonical number formatting for the wire.
 *
 * The server (CPython) serializes floats with the shortest round-trip
 * representation and its particular fixed/scientific switchover, so
 * byte-identical payloads require replicating that formatting here.
 * Conformance is pinned by golden/float_repr.json.
 */

/** Shortest round-trip float text in the server's format. */
export function floatText(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error('non-finite number in payload');
  }
  if (value === 0) {
    return '0.0'; // wire rule: negative zero is normalized
  }
  const negative = value < 0;
  const magnitude = Math.abs(value);
  // toExponential() without an argument yields the shortest digit string
  // that uniquely identifies the double: "d[.dddd]e±k"
  const [mantissa, exponentText] = magnitude.toExponential().split('e');
  const digits = mantissa.replace('.', '');
  // value = 0.<digits> * 10^decpt
  const decpt = parseInt(exponentText, 10) + 1;

  let text: string;
  if (decpt > -4 && decpt <= 16) {
    if (decpt <= 0) {
      text = '0.' + '0'.repeat(-decpt) + digits;
    } else if (decpt >= digits.length) {
      text = digits + '0'.repeat(decpt - digits.length) + '.0';
    } else {
      text = digits.slice(0, decpt) + '.' + digits.slice(decpt);
    }
  } else {
    const exponent = decpt - 1;
    const sign = exponent < 0 ? '-' : '+';
    const exponentDigits = String(Math.abs(exponent)).padStart(2, '0');
    const head = digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits[0];
    text = `${head}e${sign}${exponentDigits}`;
  }
  return negative ? `-${text}` : text;
}

/** Integer field text; rejects non-integers rather than truncating. */
export function intText(value: number): string {
  if (!Number.isInteger(value)) {
    throw new Error(`expected an integer, got ${value}`);
  }
  return String(value);
}

/** JSON string literal with ASCII-only escapes, matching the server. */
export function stringText(value: string): string {
  let out = '"';
  for (let k = 0; k < value.length; k += 1) {
    const code = value.charCodeAt(k);
    const ch = value[k];
    if (ch === '"') {
      out += '\\"';
    } else if (ch === '\\') {
      out += '\\\\';
    } else if (code === 0x08) {
      out += '\\b';
    } else if (code === 0x09) {
      out += '\\t';
    } else if (code === 0x0a) {
      out += '\\n';
    } else if (code === 0x0c) {
      out += '\\f';
    } else if (code === 0x0d) {
      out += '\\r';
    } else if (code < 0x20 || code >= 0x7f) {
      out += '\\u' + code.toString(16).padStart(4, '0');
    } else {
      out += ch;
    }
  }
  return out + '"';
}
