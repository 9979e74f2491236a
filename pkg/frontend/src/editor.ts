/** Matcher editor: register plugin code (or a builtin/command) through the
 * API. Client-side validation catches the obvious mistakes before the POST;
 * server failures are surfaced verbatim. */

import { ApiError, MatchbenchClient, MatcherRegistration } from "./api.js";
import type { MatcherDict } from "./types.js";

export type RegistrationResult =
  | { ok: true; matcher: MatcherDict }
  | { ok: false; error: string };

export function validateRegistration(id: string, existingIds: string[]): string | null {
  const trimmed = id.trim();
  if (!trimmed) {
    return "matcher id is required";
  }
  if (existingIds.includes(trimmed)) {
    return `matcher '${trimmed}' is already registered`;
  }
  return null;
}

export async function submitMatcher(
  client: MatchbenchClient,
  sessionId: string,
  registration: MatcherRegistration,
  existingIds: string[],
): Promise<RegistrationResult> {
  const invalid = validateRegistration(registration.id, existingIds);
  if (invalid !== null) {
    return { ok: false, error: invalid };
  }
  try {
    const created = await client.registerMatcher(sessionId, {
      ...registration,
      id: registration.id.trim(),
    });
    return { ok: true, matcher: created.matcher };
  } catch (err) {
    if (err instanceof ApiError) {
      return { ok: false, error: err.detail }; // the server's reason, verbatim
    }
    throw err;
  }
}

/** Badge text for a matcher row: failed matchers carry their reason. */
export function matcherBadge(matcher: MatcherDict): string {
  if (matcher.status === "failed") {
    return matcher.failure_reason ? `failed: ${matcher.failure_reason}` : "failed";
  }
  return matcher.status;
}
