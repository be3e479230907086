// Wire types for the session service. The schemas are strict: a payload
// carrying any field beyond the blind contract (for example level or
// attenuation metadata) fails to parse, so it can never reach the UI.

import { z } from "zod";

export const SessionItemSchema = z
  .object({
    item_id: z.string().min(1),
    stimuli: z.array(z.string().min(1)).min(2),
    order: z.array(z.number().int().nonnegative()),
    trial: z.boolean(),
  })
  .strict()
  .refine(
    (item) => {
      const sorted = [...item.order].sort((a, b) => a - b);
      return (
        item.order.length === item.stimuli.length &&
        sorted.every((v, i) => v === i)
      );
    },
    { message: "order must be a permutation of the stimulus indices" },
  );

export const SessionPayloadSchema = z
  .object({
    schema: z.literal("dbl-session/1"),
    subject_slot: z.string(),
    items: z.array(SessionItemSchema).min(1),
  })
  .strict();

export type SessionItem = z.infer<typeof SessionItemSchema>;
export type SessionPayload = z.infer<typeof SessionPayloadSchema>;

export interface RatingEntry {
  stimulus_id: string;
  rating: number;
}

export interface RatingsSubmission {
  subject_id: string;
  experience: string;
  item_id: string;
  ratings: RatingEntry[];
}

/** Neutral label (A..H) for a condition slot; never derived from levels. */
export function conditionLabel(position: number): string {
  return String.fromCharCode(65 + position);
}

export function parseSession(raw: unknown): SessionPayload {
  return SessionPayloadSchema.parse(raw);
}
