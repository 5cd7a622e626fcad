declare module "pngjs" {
  export class PNG {
    constructor(options?: { width?: number; height?: number });
    width: number;
    height: number;
    data: Buffer;
    static sync: {
      write(png: PNG, options?: object): Buffer;
      read(buffer: Buffer): PNG;
    };
  }
}
