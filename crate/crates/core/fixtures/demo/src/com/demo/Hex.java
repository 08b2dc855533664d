package com.demo;

public final class Hex {

    private static final char[] DIGITS = "0123456789abcdef".toCharArray();

    private Hex() {
    }

    public static String encode(byte[] data) {
        StringBuilder out = new StringBuilder(data.length * 2);
        for (byte b : data) {
            out.append(DIGITS[(b >> 4) & 0xf]);
            out.append(DIGITS[b & 0xf]);
        }
        return out.toString();
    }

    public static boolean looksEncoded(String text) {
        if (text == null || text.isEmpty()) {
            return false;
        }
        if (text.length() % 2 != 0) {
            return false;
        }
        for (int i = 0; i < text.length(); i++) {
            char c = text.charAt(i);
            boolean hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
            if (!hex) {
                return false;
            }
        }
        return true;
    }
}
