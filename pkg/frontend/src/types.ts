// Wire types mirroring the benchmark's JSON contracts.

export type AttributeKind = 'numerical' | 'categorical';

export interface DatabaseSpec {
  tables: Record<string, Record<string, AttributeKind>>;
}

export interface AttributeRef {
  table: string;
  attribute: string;
}

export interface FieldRef extends AttributeRef {
  aggregation?: 'SUM' | 'AVG' | 'MIN' | 'MAX' | 'COUNT';
}

export interface VisualizationSpec {
  name: string;
  fields: FieldRef[];
  wildcard?: { allowed_fields: AttributeRef[]; allow_new_relationships: boolean };
  levels?: AttributeRef[][];
}

export type WidgetClass =
  | 'radio_button'
  | 'checkbox'
  | 'list_box'
  | 'numeric_incrementer'
  | 'dropdown_list'
  | 'textbox'
  | 'next_button'
  | 'slider'
  | 'hover'
  | 'panning'
  | 'brush'
  | 'zoom_qualitative'
  | 'zoom_quantitative';

export interface WidgetSpec {
  name: string;
  widget_class: WidgetClass;
  attribute: AttributeRef[];
  data_backed?: boolean;
}

export interface TargetRef {
  type: 'visualization' | 'widget';
  name: string;
}

export interface RelationshipSpec {
  name: string;
  source: string;
  attribute: AttributeRef[];
  targets: TargetRef[];
}

export interface InterfaceSpec {
  visualizations: VisualizationSpec[];
  widgets: WidgetSpec[];
  relationships: RelationshipSpec[];
}

// Vega-Lite style field predicates, as accepted by the interaction log.
export type FieldPredicate =
  | { field: string; equal: string | number }
  | { field: string; lt: number }
  | { field: string; lte: number }
  | { field: string; gt: number }
  | { field: string; gte: number }
  | { field: string; range: [number, number] }
  | { field: string; oneOf: (string | number)[] }
  | { field: string; valid: true };

export type Predicate =
  | FieldPredicate
  | { and: Predicate[] }
  | { or: Predicate[] }
  | { not: Predicate };

export interface InteractionEvent {
  relationship: string;
  timestamp: number;
  parameters: Predicate | Record<string, never>;
}

// Value domains used to populate widget options (same file format the
// simulator consumes): distinct values or min/max per attribute.
export type DomainEntry = { values: (string | number)[] } | { min: number; max: number };
export type Domains = Record<string, DomainEntry>;

export interface QueryResult {
  timestamp: number;
  queries: { node: string; sql: string; detail_level: number; columns: string[]; rows: unknown[][] }[];
}
