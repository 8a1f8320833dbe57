// Predicate construction and the client-side event validation that runs
// before anything enters the log buffer.

import type {
  AttributeRef,
  DatabaseSpec,
  Domains,
  DomainEntry,
  InteractionEvent,
  InterfaceSpec,
  Predicate,
  RelationshipSpec,
} from './types.js';

export function predicateFields(p: Predicate): Set<string> {
  const out = new Set<string>();
  const walk = (node: Predicate): void => {
    if ('and' in node) node.and.forEach(walk);
    else if ('or' in node) node.or.forEach(walk);
    else if ('not' in node) walk(node.not);
    else out.add(node.field);
  };
  walk(p);
  return out;
}

export function andOf(parts: Predicate[]): Predicate {
  if (parts.length === 1) return parts[0];
  return { and: parts };
}

export function domainFor(domains: Domains, ref: AttributeRef): DomainEntry | undefined {
  return domains[`${ref.table}.${ref.attribute}`] ?? domains[ref.attribute];
}

export function domainValues(domains: Domains, ref: AttributeRef): (string | number)[] {
  const entry = domainFor(domains, ref);
  if (entry && 'values' in entry) return entry.values;
  return [];
}

export function domainRange(domains: Domains, ref: AttributeRef): [number, number] {
  const entry = domainFor(domains, ref);
  if (entry && 'min' in entry) return [entry.min, entry.max];
  return [0, 100];
}

const NUMERIC_OPS = ['lt', 'lte', 'gt', 'gte', 'range'] as const;

export class ValidationError extends Error {}

/**
 * Mirror of the server-side event checks: the relationship must exist,
 * the parameters must cover exactly its attribute list, ranges must be
 * ordered and numeric comparisons must touch numerical attributes.
 */
export function validateEvent(
  spec: InterfaceSpec,
  db: DatabaseSpec | null,
  event: InteractionEvent,
): RelationshipSpec {
  const rel = spec.relationships.find((r) => r.name === event.relationship);
  if (!rel) throw new ValidationError(`unknown relationship ${event.relationship}`);
  if (!Number.isInteger(event.timestamp)) throw new ValidationError('timestamp must be integer ms');
  const declared = new Set(rel.attribute.map((a) => a.attribute));
  const params = event.parameters as Predicate;
  if (Object.keys(event.parameters).length === 0) {
    if (declared.size > 0) throw new ValidationError(`parameters must cover ${[...declared]}`);
    return rel;
  }
  const covered = predicateFields(params);
  if (covered.size !== declared.size || [...covered].some((f) => !declared.has(f))) {
    throw new ValidationError(
      `parameter coverage mismatch: declared [${[...declared]}], covered [${[...covered]}]`,
    );
  }
  const checkOps = (node: Predicate): void => {
    if ('and' in node) return node.and.forEach(checkOps);
    if ('or' in node) return node.or.forEach(checkOps);
    if ('not' in node) return checkOps(node.not);
    if ('range' in node) {
      const [lo, hi] = node.range;
      if (lo > hi) throw new ValidationError(`range low ${lo} exceeds high ${hi}`);
    }
    if (db) {
      const ref = rel.attribute.find((a) => a.attribute === node.field);
      if (ref) {
        const kind = db.tables[ref.table]?.[ref.attribute];
        const numericOp = NUMERIC_OPS.some((op) => op in node);
        if (numericOp && kind === 'categorical') {
          throw new ValidationError(`numeric operator on categorical attribute ${node.field}`);
        }
      }
    }
  };
  checkOps(params);
  return rel;
}
