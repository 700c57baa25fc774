export * from "./types.js";
export * from "./api.js";
export * from "./geometry.js";
export * from "./state.js";
export * from "./votes.js";
export * from "./whatif.js";
export * from "./drag.js";
